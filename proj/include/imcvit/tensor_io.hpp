// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "imcvit/func_sim.hpp"

namespace imcvit {

// Flat binary container, little-endian:
//   "XBTC" | u32 version | u32 count | count x tensor
//   tensor: u16 name_len | name | u8 dtype | u8 rank | i64 dims[rank]
//           | f64 scale | i32 zero_point | payload
enum class DType : std::uint8_t { F64 = 0, F32 = 1, I32 = 2, I8 = 3, U8 = 4 };

struct Tensor {
    std::string name;
    DType dtype = DType::F64;
    std::vector<std::int64_t> dims;
    double scale = 1.0;
    std::int32_t zero_point = 0;
    std::vector<double> data;  ///< row-major

    std::int64_t element_count() const;
};

void write_tensors(const std::string& path, const std::vector<Tensor>& tensors);
std::vector<Tensor> read_tensors(const std::string& path);

Tensor tensor_from_matrix(const std::string& name, const Matrix& m, DType dtype = DType::F64);
Tensor tensor_from_quantized(const std::string& name, const QuantizedMatrix& q);
Matrix matrix_from_tensor(const Tensor& t);
QuantizedMatrix quantized_from_tensor(const Tensor& t);

std::vector<Tensor> weights_to_tensors(const ModelWeights& weights);
ModelWeights weights_from_tensors(const std::vector<Tensor>& tensors);

}  // namespace imcvit
