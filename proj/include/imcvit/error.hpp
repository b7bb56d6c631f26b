// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace imcvit {

/// Raised for invalid configurations, rejected inputs and I/O failures.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string& message) {
    if (!cond) throw Error(message);
}

}  // namespace imcvit
