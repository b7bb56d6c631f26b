// SPDX-License-Identifier: Apache-2.0
#include "imcvit/tensor_io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <map>

#include "imcvit/error.hpp"

namespace imcvit {

static_assert(std::endian::native == std::endian::little, "tensor I/O assumes a little-endian host");

namespace {

constexpr char kMagic[4] = {'X', 'B', 'T', 'C'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::ostream& os, T v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& is, const std::string& path) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    require(is.good(), "truncated tensor file '" + path + "'");
    return v;
}

std::size_t dtype_size(DType d) {
    switch (d) {
        case DType::F64: return 8;
        case DType::F32: return 4;
        case DType::I32: return 4;
        case DType::I8: return 1;
        case DType::U8: return 1;
    }
    throw Error("unknown tensor dtype");
}

template <typename T>
void put_as(std::ostream& os, double v, const std::string& name) {
    if constexpr (std::is_integral_v<T>) {
        require(v == std::round(v) && v >= std::numeric_limits<T>::min() &&
                    v <= std::numeric_limits<T>::max(),
                "tensor '" + name + "' value " + std::to_string(v) + " does not fit its dtype");
    }
    put(os, static_cast<T>(v));
}

}  // namespace

std::int64_t Tensor::element_count() const {
    std::int64_t n = 1;
    for (auto d : dims) n *= d;
    return n;
}

void write_tensors(const std::string& path, const std::vector<Tensor>& tensors) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    require(os.good(), "cannot open '" + path + "' for writing");
    os.write(kMagic, 4);
    put<std::uint32_t>(os, kVersion);
    put<std::uint32_t>(os, static_cast<std::uint32_t>(tensors.size()));
    for (const auto& t : tensors) {
        require(t.name.size() <= 0xFFFF, "tensor name too long");
        require(t.dims.size() <= 0xFF, "tensor rank too large");
        require(t.element_count() == static_cast<std::int64_t>(t.data.size()),
                "tensor '" + t.name + "' data size does not match its dims");
        put<std::uint16_t>(os, static_cast<std::uint16_t>(t.name.size()));
        os.write(t.name.data(), static_cast<std::streamsize>(t.name.size()));
        put<std::uint8_t>(os, static_cast<std::uint8_t>(t.dtype));
        put<std::uint8_t>(os, static_cast<std::uint8_t>(t.dims.size()));
        for (auto d : t.dims) put<std::int64_t>(os, d);
        put<double>(os, t.scale);
        put<std::int32_t>(os, t.zero_point);
        for (double v : t.data) {
            switch (t.dtype) {
                case DType::F64: put<double>(os, v); break;
                case DType::F32: put<float>(os, static_cast<float>(v)); break;
                case DType::I32: put_as<std::int32_t>(os, v, t.name); break;
                case DType::I8: put_as<std::int8_t>(os, v, t.name); break;
                case DType::U8: put_as<std::uint8_t>(os, v, t.name); break;
            }
        }
    }
    require(os.good(), "failed writing '" + path + "'");
}

std::vector<Tensor> read_tensors(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    require(is.good(), "cannot open tensor file '" + path + "'");
    char magic[4];
    is.read(magic, 4);
    require(is.good() && std::memcmp(magic, kMagic, 4) == 0, "'" + path + "' is not a tensor file");
    const auto version = get<std::uint32_t>(is, path);
    require(version == kVersion, "unsupported tensor file version " + std::to_string(version));
    const auto count = get<std::uint32_t>(is, path);
    std::vector<Tensor> out;
    for (std::uint32_t i = 0; i < count; ++i) {
        Tensor t;
        const auto name_len = get<std::uint16_t>(is, path);
        t.name.resize(name_len);
        is.read(t.name.data(), name_len);
        require(is.good(), "truncated tensor file '" + path + "'");
        const auto dtype = get<std::uint8_t>(is, path);
        require(dtype <= static_cast<std::uint8_t>(DType::U8), "unknown dtype in '" + path + "'");
        t.dtype = static_cast<DType>(dtype);
        const auto rank = get<std::uint8_t>(is, path);
        for (int r = 0; r < rank; ++r) {
            t.dims.push_back(get<std::int64_t>(is, path));
            require(t.dims.back() >= 0, "negative dimension in '" + path + "'");
        }
        t.scale = get<double>(is, path);
        t.zero_point = get<std::int32_t>(is, path);
        const auto n = t.element_count();
        require(n <= (std::int64_t{1} << 34) / static_cast<std::int64_t>(dtype_size(t.dtype)),
                "tensor '" + t.name + "' is implausibly large");
        t.data.reserve(static_cast<std::size_t>(n));
        for (std::int64_t k = 0; k < n; ++k) {
            switch (t.dtype) {
                case DType::F64: t.data.push_back(get<double>(is, path)); break;
                case DType::F32: t.data.push_back(get<float>(is, path)); break;
                case DType::I32: t.data.push_back(get<std::int32_t>(is, path)); break;
                case DType::I8: t.data.push_back(get<std::int8_t>(is, path)); break;
                case DType::U8: t.data.push_back(get<std::uint8_t>(is, path)); break;
            }
        }
        out.push_back(std::move(t));
    }
    return out;
}

Tensor tensor_from_matrix(const std::string& name, const Matrix& m, DType dtype) {
    Tensor t;
    t.name = name;
    t.dtype = dtype;
    t.dims = {m.rows(), m.cols()};
    t.data.reserve(static_cast<std::size_t>(m.size()));
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) t.data.push_back(m(r, c));
    return t;
}

Tensor tensor_from_quantized(const std::string& name, const QuantizedMatrix& q) {
    const bool narrow = q.bits <= 8;
    Tensor t = tensor_from_matrix(name, q.values.cast<double>(),
                                  narrow ? (q.is_signed ? DType::I8 : DType::U8) : DType::I32);
    t.scale = q.scale;
    t.zero_point = q.zero_point;
    return t;
}

Matrix matrix_from_tensor(const Tensor& t) {
    require(t.dims.size() == 1 || t.dims.size() == 2,
            "tensor '" + t.name + "' must have rank 1 or 2");
    const auto rows = t.dims[0];
    const auto cols = t.dims.size() == 2 ? t.dims[1] : 1;
    Matrix m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c)
            m(r, c) = t.data[static_cast<std::size_t>(r * cols + c)];
    return m;
}

QuantizedMatrix quantized_from_tensor(const Tensor& t) {
    require(t.dtype == DType::I8 || t.dtype == DType::U8 || t.dtype == DType::I32,
            "tensor '" + t.name + "' is not integer-typed");
    QuantizedMatrix q;
    q.values = matrix_from_tensor(t).cast<std::int32_t>();
    q.scale = t.scale;
    q.zero_point = t.zero_point;
    q.is_signed = t.dtype != DType::U8;
    q.bits = t.dtype == DType::I32 ? 16 : 8;
    return q;
}

namespace {

Tensor vector_tensor(const std::string& name, const Vector& v) {
    Tensor t = tensor_from_matrix(name, v);
    t.dims = {v.size()};
    return t;
}

}  // namespace

std::vector<Tensor> weights_to_tensors(const ModelWeights& weights) {
    std::vector<Tensor> out;
    auto lin = [&](const std::string& p, const Linear& l) {
        out.push_back(tensor_from_matrix(p + ".w", l.w));
        out.push_back(vector_tensor(p + ".b", l.b));
    };
    auto nrm = [&](const std::string& p, const Norm& n) {
        out.push_back(vector_tensor(p + ".gamma", n.gamma));
        out.push_back(vector_tensor(p + ".beta", n.beta));
    };
    for (std::size_t i = 0; i < weights.encoders.size(); ++i) {
        const auto& e = weights.encoders[i];
        const std::string p = "enc" + std::to_string(i);
        nrm(p + ".ln1", e.ln1);
        lin(p + ".q", e.q);
        lin(p + ".k", e.k);
        lin(p + ".v", e.v);
        lin(p + ".proj", e.proj);
        nrm(p + ".ln2", e.ln2);
        lin(p + ".mlp1", e.mlp1);
        lin(p + ".mlp2", e.mlp2);
        if (e.tb) {
            nrm(p + ".tb.norm", e.tb->norm);
            lin(p + ".tb.fc", e.tb->fc);
        }
    }
    return out;
}

ModelWeights weights_from_tensors(const std::vector<Tensor>& tensors) {
    std::map<std::string, const Tensor*> by_name;
    for (const auto& t : tensors) {
        require(by_name.emplace(t.name, &t).second, "duplicate tensor '" + t.name + "'");
    }
    auto find = [&](const std::string& name) -> const Tensor* {
        auto it = by_name.find(name);
        return it == by_name.end() ? nullptr : it->second;
    };
    auto mat = [&](const std::string& name) {
        const Tensor* t = find(name);
        require(t != nullptr, "missing tensor '" + name + "'");
        return matrix_from_tensor(*t);
    };
    auto vec = [&](const std::string& name) -> Vector { return mat(name).col(0); };
    auto lin = [&](const std::string& p) { return Linear{mat(p + ".w"), vec(p + ".b")}; };
    auto nrm = [&](const std::string& p) { return Norm{vec(p + ".gamma"), vec(p + ".beta")}; };

    ModelWeights mw;
    for (int i = 0; find("enc" + std::to_string(i) + ".q.w"); ++i) {
        const std::string p = "enc" + std::to_string(i);
        EncoderWeights e;
        e.ln1 = nrm(p + ".ln1");
        e.q = lin(p + ".q");
        e.k = lin(p + ".k");
        e.v = lin(p + ".v");
        e.proj = lin(p + ".proj");
        e.ln2 = nrm(p + ".ln2");
        e.mlp1 = lin(p + ".mlp1");
        e.mlp2 = lin(p + ".mlp2");
        if (find(p + ".tb.fc.w")) e.tb = TbWeights{nrm(p + ".tb.norm"), lin(p + ".tb.fc")};
        mw.encoders.push_back(std::move(e));
    }
    return mw;
}

}  // namespace imcvit
