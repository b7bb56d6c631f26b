// SPDX-License-Identifier: Apache-2.0
#include "imcvit/func_sim.hpp"

#include <algorithm>
#include <cmath>

#include "imcvit/error.hpp"

namespace imcvit {

// ---------------------------------------------------------------------------
// Quantization

std::int64_t QuantizedMatrix::qmin() const {
    return is_signed ? -((std::int64_t{1} << (bits - 1)) - 1) : 0;
}

std::int64_t QuantizedMatrix::qmax() const {
    return is_signed ? (std::int64_t{1} << (bits - 1)) - 1 : (std::int64_t{1} << bits) - 1;
}

Matrix QuantizedMatrix::dequantize() const {
    return (values.cast<double>().array() - zero_point).matrix() * scale;
}

QuantizedMatrix quantize_affine(const Matrix& x, int bits) {
    require(bits >= 1 && bits <= 16, "quantization bits must be in [1, 16]");
    QuantizedMatrix q;
    q.bits = bits;
    q.is_signed = false;
    const double lo = std::min(0.0, x.size() ? x.minCoeff() : 0.0);
    const double hi = std::max(0.0, x.size() ? x.maxCoeff() : 0.0);
    const double levels = static_cast<double>(q.qmax());
    q.scale = hi > lo ? (hi - lo) / levels : 1.0;
    q.zero_point = static_cast<int>(std::clamp(std::round(-lo / q.scale), 0.0, levels));
    q.values = x.unaryExpr([&](double v) {
                    return static_cast<std::int32_t>(
                        std::clamp(std::round(v / q.scale) + q.zero_point, 0.0, levels));
                })
                   .cast<std::int32_t>();
    return q;
}

QuantizedMatrix quantize_symmetric(const Matrix& x, int bits) {
    require(bits >= 2 && bits <= 16, "symmetric quantization bits must be in [2, 16]");
    QuantizedMatrix q;
    q.bits = bits;
    q.is_signed = true;
    const double top = static_cast<double>(q.qmax());
    const double m = x.size() ? x.cwiseAbs().maxCoeff() : 0.0;
    q.scale = m > 0 ? m / top : 1.0;
    q.values = x.unaryExpr([&](double v) {
                    return static_cast<std::int32_t>(std::clamp(std::round(v / q.scale), -top, top));
                })
                   .cast<std::int32_t>();
    return q;
}

// ---------------------------------------------------------------------------
// Noise

double NoiseModel::effective_read_var(const DeviceParams& dev) const {
    if (!enabled || !dev.has_variation()) return 0.0;
    return read_var.value_or(dev.read_var);
}

double NoiseModel::effective_write_var(const DeviceParams& dev) const {
    if (!enabled || !dev.has_variation()) return 0.0;
    return write_var.value_or(dev.write_var);
}

NoiseModel NoiseModel::off(int adc_bits) {
    NoiseModel m;
    m.enabled = false;
    m.adc_bits = adc_bits;
    return m;
}

NoiseSource::NoiseSource(const NoiseModel& model) : model_(model), engine_(model.rng_seed) {}

NoiseSource::NoiseSource(const NoiseModel& model, std::uint64_t stream_id) : model_(model) {
    std::seed_seq seq{static_cast<std::uint32_t>(model.rng_seed),
                      static_cast<std::uint32_t>(model.rng_seed >> 32),
                      static_cast<std::uint32_t>(stream_id),
                      static_cast<std::uint32_t>(stream_id >> 32), 0x5eedu};
    engine_.seed(seq);
}

// ---------------------------------------------------------------------------
// Crossbars

double CrossbarState::delta_g() const {
    return (device.g_max() - device.g_min()) / (device.cell_levels() - 1);
}

Matrix CrossbarState::levels() const {
    Matrix l = (conductances.array() - device.g_min()) / delta_g();
    if (!programmed_with_noise) l = l.array().round();
    return l;
}

CrossbarState program_crossbar(const QuantizedMatrix& cell_levels, const DeviceParams& dev,
                               int xbar_size, NoiseSource& noise) {
    const auto& v = cell_levels.values;
    require(v.rows() <= xbar_size && v.cols() <= xbar_size,
            "weight tile " + std::to_string(v.rows()) + "x" + std::to_string(v.cols()) +
                " does not fit a " + std::to_string(xbar_size) + "x" + std::to_string(xbar_size) +
                " crossbar");
    const int top = dev.cell_levels() - 1;
    require(v.size() == 0 || (v.minCoeff() >= 0 && v.maxCoeff() <= top),
            "cell levels must lie in [0, " + std::to_string(top) + "]");

    CrossbarState s;
    s.device = dev;
    s.rows_used = static_cast<int>(v.rows());
    s.cols_used = static_cast<int>(v.cols());
    s.conductances = Matrix::Constant(xbar_size, xbar_size, dev.g_min());
    const double g_min = dev.g_min();
    const double g_max = dev.g_max();
    const double dg = s.delta_g();
    const double wv = noise.model().effective_write_var(dev);
    s.programmed_with_noise = wv > 0.0;
    for (Eigen::Index c = 0; c < v.cols(); ++c) {
        for (Eigen::Index r = 0; r < v.rows(); ++r) {
            double g = g_min + v(r, c) * dg;
            if (wv > 0.0) {
                const double eps = noise.standard_normal();
                // Additive variation is expressed relative to one level step.
                g = noise.model().form == NoiseForm::Multiplicative ? g * (1.0 + wv * eps)
                                                                      : g + wv * dg * eps;
                g = std::clamp(g, g_min, g_max);
            }
            s.conductances(r, c) = g;
        }
    }
    return s;
}

double AdcModel::convert(double column_value) const {
    const double code = std::clamp(std::round(column_value / static_cast<double>(step)), 0.0,
                                   static_cast<double>(max_code));
    return code * static_cast<double>(step);
}

double AdcModel::max_error() const {
    if (step == 1) return 0.0;
    return std::max(static_cast<double>(step) / 2.0,
                    static_cast<double>(full_scale - max_code * step));
}

AdcModel make_adc(int adc_bits, int xbar_size, int bits_per_cell, int input_split_bits) {
    require(adc_bits >= 1 && adc_bits <= 30, "adc_bits must be in [1, 30]");
    AdcModel a;
    a.bits = adc_bits;
    a.full_scale = static_cast<std::int64_t>(xbar_size) * ((1 << bits_per_cell) - 1) *
                   ((1 << input_split_bits) - 1);
    int needed = 0;
    while ((std::int64_t{1} << needed) < a.full_scale + 1) ++needed;
    a.step = std::int64_t{1} << std::max(0, needed - adc_bits);
    a.max_code = (std::int64_t{1} << adc_bits) - 1;
    return a;
}

namespace {

std::size_t tile_index(int rb, int cb, int sign, int slice, int col_blocks, int slices) {
    return static_cast<std::size_t>(((rb * col_blocks + cb) * 2 + sign) * slices + slice);
}

int ceil_div(int a, int b) { return (a + b - 1) / b; }

}  // namespace

CrossbarLayer CrossbarLayer::program(const QuantizedMatrix& weights, const DeviceParams& dev,
                                     int xbar_size, NoiseSource& noise) {
    dev.validate();
    require(xbar_size >= 1, "xbar_size must be >= 1");
    const auto& w = weights.values;
    require(w.rows() >= 1 && w.cols() >= 1, "cannot program an empty weight matrix");

    CrossbarLayer layer;
    layer.in_dim_ = static_cast<int>(w.rows());
    layer.out_dim_ = static_cast<int>(w.cols());
    layer.xbar_size_ = xbar_size;
    layer.slices_ = ceil_div(weights.bits, dev.bits_per_cell);
    layer.row_blocks_ = ceil_div(layer.in_dim_, xbar_size);
    layer.col_blocks_ = ceil_div(layer.out_dim_, xbar_size);
    layer.device_ = dev;
    layer.tiles_.resize(static_cast<std::size_t>(layer.row_blocks_) * layer.col_blocks_ * 2 *
                        layer.slices_);
    layer.levels_.resize(layer.tiles_.size());

    const int mask = dev.cell_levels() - 1;
    for (int rb = 0; rb < layer.row_blocks_; ++rb) {
        for (int cb = 0; cb < layer.col_blocks_; ++cb) {
            const int r0 = rb * xbar_size;
            const int c0 = cb * xbar_size;
            const int rows = std::min(xbar_size, layer.in_dim_ - r0);
            const int cols = std::min(xbar_size, layer.out_dim_ - c0);
            const LevelMatrix block = w.block(r0, c0, rows, cols);
            for (int sign = 0; sign < 2; ++sign) {
                const LevelMatrix mag = sign == 0 ? LevelMatrix(block.cwiseMax(0))
                                                  : LevelMatrix((-block).cwiseMax(0));
                for (int s = 0; s < layer.slices_; ++s) {
                    QuantizedMatrix cells;
                    cells.bits = dev.bits_per_cell;
                    cells.values = mag.unaryExpr(
                        [&](std::int32_t m) { return (m >> (s * dev.bits_per_cell)) & mask; });
                    const auto idx = tile_index(rb, cb, sign, s, layer.col_blocks_, layer.slices_);
                    layer.tiles_[idx] = program_crossbar(cells, dev, xbar_size, noise);
                    layer.levels_[idx] = layer.tiles_[idx].levels();
                }
            }
        }
    }
    return layer;
}

bool CrossbarLayer::programmed_with_noise() const {
    return std::any_of(tiles_.begin(), tiles_.end(),
                       [](const CrossbarState& s) { return s.programmed_with_noise; });
}

const CrossbarState& CrossbarLayer::tile(int row_block, int col_block, int sign, int slice) const {
    require(row_block >= 0 && row_block < row_blocks_ && col_block >= 0 && col_block < col_blocks_ &&
                (sign == 0 || sign == 1) && slice >= 0 && slice < slices_,
            "crossbar tile index out of range");
    return tiles_[tile_index(row_block, col_block, sign, slice, col_blocks_, slices_)];
}

const Matrix& CrossbarLayer::tile_levels(int row_block, int col_block, int sign, int slice) const {
    tile(row_block, col_block, sign, slice);
    return levels_[tile_index(row_block, col_block, sign, slice, col_blocks_, slices_)];
}

IntMatrix mvm_bitserial(const CrossbarLayer& layer, const QuantizedMatrix& input, int adc_bits,
                        int input_split_bits, NoiseSource& noise, MvmStats* stats) {
    const auto& x = input.values;
    require(x.cols() == layer.in_dim(),
            "input has " + std::to_string(x.cols()) + " columns, layer expects " +
                std::to_string(layer.in_dim()));
    require(!input.is_signed && (x.size() == 0 || x.minCoeff() >= 0),
            "bit-serial input codes must be non-negative");
    require(input_split_bits >= 1 && input_split_bits <= input.bits,
            "input_split_bits must be in [1, input bits]");

    const auto& dev = layer.device();
    const int xbar = layer.xbar_size();
    const int bpc = dev.bits_per_cell;
    const AdcModel adc = make_adc(adc_bits, xbar, bpc, input_split_bits);
    const int cycles = ceil_div(input.bits, input_split_bits);
    const int digit_mask = (1 << input_split_bits) - 1;
    const double rv = noise.model().effective_read_var(dev);
    const bool multiplicative = noise.model().form == NoiseForm::Multiplicative;
    const Eigen::Index n_rows = x.rows();

    IntMatrix out = IntMatrix::Zero(n_rows, layer.out_dim());
    for (int c = 0; c < cycles; ++c) {
        const Matrix digits =
            x.unaryExpr([&](std::int32_t v) { return (v >> (c * input_split_bits)) & digit_mask; })
                .cast<double>();
        for (int rb = 0; rb < layer.row_blocks(); ++rb) {
            const int r0 = rb * xbar;
            const int rows = std::min(xbar, layer.in_dim() - r0);
            const Matrix d = digits.middleCols(r0, rows);
            const Matrix d2 = d.array().square().matrix();
            for (int cb = 0; cb < layer.col_blocks(); ++cb) {
                const int c0 = cb * xbar;
                const int cols = std::min(xbar, layer.out_dim() - c0);
                for (int sign = 0; sign < 2; ++sign) {
                    for (int s = 0; s < layer.slices(); ++s) {
                        const Matrix& lv = layer.tile_levels(rb, cb, sign, s);
                        Matrix col = d * lv.topLeftCorner(rows, cols);
                        if (rv > 0.0) {
                            const auto& st = layer.tile(rb, cb, sign, s);
                            const double dg = st.delta_g();
                            // Independent per-cell read variation, summed per column.
                            Matrix var;
                            if (multiplicative) {
                                var = d2 * st.conductances.topLeftCorner(rows, cols)
                                               .array()
                                               .square()
                                               .matrix();
                                var *= (rv / dg) * (rv / dg);
                            } else {
                                var = d2.rowwise().sum() * Eigen::RowVectorXd::Ones(cols);
                                var *= rv * rv;
                            }
                            for (Eigen::Index j = 0; j < col.cols(); ++j)
                                for (Eigen::Index i = 0; i < col.rows(); ++i)
                                    col(i, j) += std::sqrt(var(i, j)) * noise.standard_normal();
                            if (stats) stats->noisy_reads += col.size();
                        }
                        const std::int64_t weight = std::int64_t{1}
                                                    << (c * input_split_bits + s * bpc);
                        for (Eigen::Index j = 0; j < col.cols(); ++j) {
                            for (Eigen::Index i = 0; i < col.rows(); ++i) {
                                const auto q = static_cast<std::int64_t>(adc.convert(col(i, j)));
                                out(i, c0 + j) += (sign == 0 ? q : -q) * weight;
                            }
                        }
                        if (stats) stats->conversions += col.size();
                    }
                }
            }
        }
    }
    return out;
}

double adc_error_bound(const CrossbarLayer& layer, int input_bits, int adc_bits,
                       int input_split_bits) {
    const int bpc = layer.device().bits_per_cell;
    const AdcModel adc = make_adc(adc_bits, layer.xbar_size(), bpc, input_split_bits);
    const int cycles = ceil_div(input_bits, input_split_bits);
    double cycle_weight = 0.0;
    for (int c = 0; c < cycles; ++c) cycle_weight += std::ldexp(1.0, c * input_split_bits);
    double slice_weight = 0.0;
    for (int s = 0; s < layer.slices(); ++s) slice_weight += std::ldexp(1.0, s * bpc);
    return adc.max_error() * cycle_weight * slice_weight * 2.0 * layer.row_blocks();
}

// ---------------------------------------------------------------------------
// Transformer pieces

Vector stable_softmax(const Vector& x) {
    require(x.size() > 0, "softmax of an empty vector");
    require(x.allFinite(), "softmax input must be finite");
    const Vector e = (x.array() - x.maxCoeff()).exp().matrix();
    return e / e.sum();
}

Matrix softmax_rows(const Matrix& x) {
    Matrix out(x.rows(), x.cols());
    for (Eigen::Index r = 0; r < x.rows(); ++r)
        out.row(r) = stable_softmax(x.row(r).transpose()).transpose();
    return out;
}

Matrix layer_norm(const Matrix& x, const Vector& gamma, const Vector& beta, double eps) {
    require(gamma.size() == x.cols() && beta.size() == x.cols(), "layer_norm parameter size mismatch");
    Matrix out(x.rows(), x.cols());
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
        const double mean = x.row(r).mean();
        const Eigen::RowVectorXd c = x.row(r).array() - mean;
        const double var = c.squaredNorm() / static_cast<double>(x.cols());
        out.row(r) = (c / std::sqrt(var + eps)).cwiseProduct(gamma.transpose()) + beta.transpose();
    }
    return out;
}

Matrix gelu(const Matrix& x) {
    return x.unaryExpr([](double v) { return 0.5 * v * (1.0 + std::erf(v / std::sqrt(2.0))); });
}

ModelWeights ModelWeights::random(const ModelConfig& cfg, std::uint64_t seed, double init_std) {
    cfg.validate();
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, init_std);
    auto gauss = [&](int rows, int cols) {
        Matrix m(rows, cols);
        for (Eigen::Index c = 0; c < cols; ++c)
            for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = normal(rng);
        return m;
    };
    auto linear = [&](int in, int out) { return Linear{gauss(in, out), Vector::Zero(out)}; };
    auto norm = [&](int n) { return Norm{Vector::Ones(n), Vector::Zero(n)}; };

    const int d = cfg.d;
    const int h = cfg.mlp_hidden();
    ModelWeights mw;
    for (int i = 0; i < cfg.n_encoders; ++i) {
        EncoderWeights e;
        e.ln1 = norm(d);
        e.q = linear(d, d);
        e.k = linear(d, d);
        e.v = linear(d, d);
        e.proj = linear(d, d);
        e.ln2 = norm(d);
        e.mlp1 = linear(d, h);
        e.mlp2 = linear(h, d);
        if (i > 0) {
            TbWeights tb{norm(d), linear(d, d)};
            tb.fc.w += Matrix::Identity(d, d);
            e.tb = std::move(tb);
        }
        mw.encoders.push_back(std::move(e));
    }
    return mw;
}

void ModelWeights::check(const Workload& workload) const {
    const auto& cfg = workload.config;
    require(encoders.size() == workload.encoders.size(),
            "weights cover " + std::to_string(encoders.size()) + " encoders, workload has " +
                std::to_string(workload.encoders.size()));
    const int d = cfg.d;
    const int h = cfg.mlp_hidden();
    auto lin = [](const Linear& l, int in, int out, const std::string& what) {
        require(l.w.rows() == in && l.w.cols() == out && l.b.size() == out, what + " shape mismatch");
    };
    auto nrm = [](const Norm& n, int dim, const std::string& what) {
        require(n.gamma.size() == dim && n.beta.size() == dim, what + " shape mismatch");
    };
    for (std::size_t i = 0; i < encoders.size(); ++i) {
        const auto& e = encoders[i];
        const std::string p = "encoder " + std::to_string(i) + " ";
        nrm(e.ln1, d, p + "ln1");
        lin(e.q, d, d, p + "q");
        lin(e.k, d, d, p + "k");
        lin(e.v, d, d, p + "v");
        lin(e.proj, d, d, p + "proj");
        nrm(e.ln2, d, p + "ln2");
        lin(e.mlp1, d, h, p + "mlp1");
        lin(e.mlp2, h, d, p + "mlp2");
        if (workload.encoders[i].reuses_attention) {
            require(e.tb.has_value(), p + "reuses attention but has no transformation block weights");
            nrm(e.tb->norm, d, p + "tb norm");
            lin(e.tb->fc, d, d, p + "tb fc");
        }
    }
}

MatmulEngine::MatmulEngine(const SimOptions& options, ForwardStats& stats)
    : options_(options), stats_(stats), noise_(options.noise) {}

Matrix MatmulEngine::multiply(const Matrix& x, const Matrix& w, LayerKind kind) {
    require(x.cols() == w.rows(), "matmul shape mismatch for " + std::string(to_string(kind)));
    if (options_.mode == SimMode::Exact) return x * w;

    const auto& dev = options_.devices.for_layer(kind);
    const QuantizedMatrix qx = quantize_affine(x, options_.input_bits);
    const QuantizedMatrix qw = quantize_symmetric(w, options_.weight_bits);
    const auto layer = CrossbarLayer::program(qw, dev, options_.tiles.xbar_size, noise_);
    ++stats_.programs[kind];
    if (layer.programmed_with_noise()) ++stats_.noisy_programs[kind];

    MvmStats ms;
    const IntMatrix acc = mvm_bitserial(layer, qx, options_.noise.adc_bits,
                                        options_.input_split_bits, noise_, &ms);
    if (ms.noisy_reads) stats_.noisy_reads[kind] += ms.noisy_reads;

    // Remove the input zero point digitally: sum_i (x_i - zx) w_i.
    const Eigen::RowVectorXd col_sums = qw.values.cast<double>().colwise().sum();
    Matrix y = acc.cast<double>();
    y.rowwise() -= qx.zero_point * col_sums;
    return y * (qx.scale * qw.scale);
}

Matrix MatmulEngine::linear(const Matrix& x, const Linear& layer, LayerKind kind) {
    Matrix y = multiply(x, layer.w, kind);
    y.rowwise() += layer.b.transpose();
    return y;
}

namespace {

Matrix apply_linear(const Matrix& x, const Linear& l, LayerKind kind, MatmulEngine* engine) {
    if (engine) return engine->linear(x, l, kind);
    Matrix y = x * l.w;
    y.rowwise() += l.b.transpose();
    return y;
}

Matrix apply_mul(const Matrix& a, const Matrix& b, LayerKind kind, MatmulEngine* engine) {
    return engine ? engine->multiply(a, b, kind) : Matrix(a * b);
}

}  // namespace

Matrix attention_forward(const Matrix& q, const Matrix& k, const Matrix& v, int n_heads,
                         double scale, MatmulEngine* engine) {
    require(q.rows() == k.rows() && q.rows() == v.rows() && q.cols() == k.cols() &&
                q.cols() == v.cols(),
            "attention needs Q, K and V of equal shape");
    require(n_heads >= 1 && q.cols() % n_heads == 0, "n_heads must divide the model width");
    const Eigen::Index dh = q.cols() / n_heads;
    Matrix out(q.rows(), q.cols());
    for (int h = 0; h < n_heads; ++h) {
        const Matrix qh = q.middleCols(h * dh, dh);
        const Matrix kt = k.middleCols(h * dh, dh).transpose();
        const Matrix vh = v.middleCols(h * dh, dh);
        const Matrix scores = apply_mul(qh, kt, LayerKind::MatmulQKT, engine) * scale;
        out.middleCols(h * dh, dh) = apply_mul(softmax_rows(scores), vh, LayerKind::MatmulSV, engine);
    }
    return out;
}

Matrix tb_forward(const Matrix& attention, const TbWeights& tb, MatmulEngine* engine) {
    require(tb.fc.w.rows() == attention.cols() && tb.fc.w.cols() == attention.cols(),
            "transformation block expects a square d x d layer matching the input width");
    const Matrix n = layer_norm(attention, tb.norm.gamma, tb.norm.beta);
    return gelu(apply_linear(n, tb.fc, LayerKind::TbFc, engine));
}

ForwardResult model_forward(const Workload& workload, const ModelWeights& weights,
                            const Matrix& input, const SimOptions& options) {
    const auto& cfg = workload.config;
    weights.check(workload);
    require(input.rows() == cfg.t && input.cols() == cfg.d,
            "input must be t x d = " + std::to_string(cfg.t) + "x" + std::to_string(cfg.d));
    const double scale = options.attention_scale > 0.0 ? options.attention_scale
                                                       : 1.0 / std::sqrt(static_cast<double>(cfg.d));

    ForwardResult res;
    MatmulEngine crossbar(options, res.stats);
    MatmulEngine* engine = options.mode == SimMode::Crossbar ? &crossbar : nullptr;

    std::vector<std::optional<Matrix>> raw_attention(workload.encoders.size());
    Matrix x = input;
    for (std::size_t i = 0; i < workload.encoders.size(); ++i) {
        const auto& spec = workload.encoders[i];
        const auto& w = weights.encoders[i];
        Matrix a;
        if (spec.reuses_attention) {
            require(spec.reuse_source && *spec.reuse_source >= 0 &&
                        static_cast<std::size_t>(*spec.reuse_source) < i &&
                        raw_attention[static_cast<std::size_t>(*spec.reuse_source)],
                    "encoder " + std::to_string(i) + " has no attention output to reuse");
            a = tb_forward(*raw_attention[static_cast<std::size_t>(*spec.reuse_source)], *w.tb, engine);
            ++res.stats.tb_evaluations;
        } else {
            const Matrix h = layer_norm(x, w.ln1.gamma, w.ln1.beta);
            const Matrix q = apply_linear(h, w.q, LayerKind::FcQ, engine);
            const Matrix k = apply_linear(h, w.k, LayerKind::FcK, engine);
            const Matrix v = apply_linear(h, w.v, LayerKind::FcV, engine);
            a = attention_forward(q, k, v, cfg.n_heads, scale, engine);
            ++res.stats.attention_evaluations;
            raw_attention[i] = a;
        }
        res.attention_outputs.push_back(a);
        x += apply_linear(a, w.proj, LayerKind::FcProj, engine);
        const Matrix h2 = layer_norm(x, w.ln2.gamma, w.ln2.beta);
        x += apply_linear(gelu(apply_linear(h2, w.mlp1, LayerKind::FcMlp1, engine)), w.mlp2,
                          LayerKind::FcMlp2, engine);
    }
    res.output = x;
    return res;
}

ModelConfig toy_model_config() {
    ModelConfig cfg;
    cfg.name = "toy";
    cfg.d = 64;
    cfg.t = 32;
    cfg.n_heads = 4;
    cfg.n_encoders = 8;
    cfg.mlp_ratio = 4.0;
    cfg.include_stem = false;
    return cfg;
}

ModelWeights toy_model_weights(const ModelConfig& cfg, std::uint64_t seed, double rho) {
    require(rho >= 0.0 && rho <= 1.0, "rho must be in [0, 1]");
    ModelWeights mw = ModelWeights::random(cfg, seed);
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
    std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(static_cast<double>(cfg.d)));
    const double fresh = std::sqrt(1.0 - rho * rho);
    auto drift = [&](const Matrix* prev, Matrix& w) {
        const Matrix g = Matrix::NullaryExpr(w.rows(), w.cols(), [&] { return normal(rng); });
        w = prev ? Matrix(rho * *prev + fresh * g) : g;
    };
    for (std::size_t i = 0; i < mw.encoders.size(); ++i) {
        auto& e = mw.encoders[i];
        const auto* p = i ? &mw.encoders[i - 1] : nullptr;
        drift(p ? &p->q.w : nullptr, e.q.w);
        drift(p ? &p->k.w : nullptr, e.k.w);
        drift(p ? &p->v.w : nullptr, e.v.w);
    }
    return mw;
}

Matrix toy_input(const ModelConfig& cfg, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    Matrix x(cfg.t, cfg.d);
    for (Eigen::Index c = 0; c < x.cols(); ++c)
        for (Eigen::Index r = 0; r < x.rows(); ++r) x(r, c) = normal(rng);
    return x;
}

}  // namespace imcvit
