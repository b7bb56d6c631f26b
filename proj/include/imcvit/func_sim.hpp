// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "imcvit/workload.hpp"
#include "imcvit/xbar_map.hpp"

namespace imcvit {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using IntMatrix = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;
using LevelMatrix = Eigen::Matrix<std::int32_t, Eigen::Dynamic, Eigen::Dynamic>;

// ---------------------------------------------------------------------------
// Quantization

struct QuantizedMatrix {
    LevelMatrix values;
    double scale = 1.0;
    int zero_point = 0;
    int bits = 8;
    bool is_signed = false;

    std::int64_t qmin() const;
    std::int64_t qmax() const;
    Matrix dequantize() const;
};

/// Unsigned affine quantization; the range is widened to include zero so
/// that 0.0 is exactly representable.
QuantizedMatrix quantize_affine(const Matrix& x, int bits);
/// Signed symmetric quantization in [-(2^(b-1)-1), 2^(b-1)-1], zero point 0.
QuantizedMatrix quantize_symmetric(const Matrix& x, int bits);

// ---------------------------------------------------------------------------
// Noise

enum class NoiseForm { Multiplicative, Additive };

/// Simulation noise settings. Device variations come from DeviceParams; the
/// optional overrides replace them for devices that have variation at all
/// (SRAM stays ideal).
struct NoiseModel {
    bool enabled = true;
    std::optional<double> read_var;
    std::optional<double> write_var;
    int adc_bits = 6;
    std::uint64_t rng_seed = 0;
    NoiseForm form = NoiseForm::Multiplicative;

    double effective_read_var(const DeviceParams& dev) const;
    double effective_write_var(const DeviceParams& dev) const;

    static NoiseModel off(int adc_bits = 16);
};

class NoiseSource {
public:
    explicit NoiseSource(const NoiseModel& model);
    NoiseSource(const NoiseModel& model, std::uint64_t stream_id);

    const NoiseModel& model() const { return model_; }
    double standard_normal() { return normal_(engine_); }

    /// Independent stream for concurrent work, derived from seed and id.
    NoiseSource stream(std::uint64_t stream_id) const { return NoiseSource(model_, stream_id); }

private:
    NoiseModel model_;
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

// ---------------------------------------------------------------------------
// Crossbars

struct CrossbarState {
    Matrix conductances;  ///< xbar_size x xbar_size, siemens
    DeviceParams device;
    bool programmed_with_noise = false;
    int rows_used = 0;
    int cols_used = 0;

    double delta_g() const;
    /// Conductances expressed in cell-level units above G_min.
    Matrix levels() const;
};

/// Programs cell levels (each in [0, 2^bits_per_cell - 1]) into a crossbar,
/// applying write variation and clipping to [G_min, G_max].
CrossbarState program_crossbar(const QuantizedMatrix& cell_levels, const DeviceParams& dev,
                               int xbar_size, NoiseSource& noise);

/// Uniform ADC over a column's worst-case accumulation range. The step is a
/// power of two so noise-free conversions stay integral.
struct AdcModel {
    int bits = 6;
    std::int64_t full_scale = 0;
    std::int64_t step = 1;
    std::int64_t max_code = 0;

    double convert(double column_value) const;
    /// Worst-case |convert(v) - v| for v in [0, full_scale].
    double max_error() const;
};

AdcModel make_adc(int adc_bits, int xbar_size, int bits_per_cell, int input_split_bits);

/// A signed weight matrix (in x out) spread over crossbar tiles:
/// row block x column block x {positive, negative} x weight slice.
class CrossbarLayer {
public:
    static CrossbarLayer program(const QuantizedMatrix& weights, const DeviceParams& dev,
                                 int xbar_size, NoiseSource& noise);

    int in_dim() const { return in_dim_; }
    int out_dim() const { return out_dim_; }
    int xbar_size() const { return xbar_size_; }
    int slices() const { return slices_; }
    int row_blocks() const { return row_blocks_; }
    int col_blocks() const { return col_blocks_; }
    const DeviceParams& device() const { return device_; }
    std::int64_t tile_count() const { return static_cast<std::int64_t>(tiles_.size()); }
    bool programmed_with_noise() const;

    const CrossbarState& tile(int row_block, int col_block, int sign, int slice) const;
    const Matrix& tile_levels(int row_block, int col_block, int sign, int slice) const;

private:
    int in_dim_ = 0;
    int out_dim_ = 0;
    int xbar_size_ = 0;
    int slices_ = 0;
    int row_blocks_ = 0;
    int col_blocks_ = 0;
    DeviceParams device_;
    std::vector<CrossbarState> tiles_;
    std::vector<Matrix> levels_;  ///< per tile, cached CrossbarState::levels()
};

struct MvmStats {
    std::int64_t conversions = 0;
    std::int64_t noisy_reads = 0;
};

/// Bit-serial crossbar product of raw integer codes:
/// out[r, o] ~= sum_i input.values[r, i] * weights.values[i, o].
IntMatrix mvm_bitserial(const CrossbarLayer& layer, const QuantizedMatrix& input, int adc_bits,
                        int input_split_bits, NoiseSource& noise, MvmStats* stats = nullptr);

/// Worst-case |mvm_bitserial - exact| per output element with noise off.
double adc_error_bound(const CrossbarLayer& layer, int input_bits, int adc_bits,
                       int input_split_bits);

// ---------------------------------------------------------------------------
// Transformer pieces

Vector stable_softmax(const Vector& x);
Matrix softmax_rows(const Matrix& x);
Matrix layer_norm(const Matrix& x, const Vector& gamma, const Vector& beta, double eps = 1e-5);
Matrix gelu(const Matrix& x);

struct Linear {
    Matrix w;  ///< in x out
    Vector b;  ///< out
};

struct Norm {
    Vector gamma;
    Vector beta;
};

struct TbWeights {
    Norm norm;
    Linear fc;
};

struct EncoderWeights {
    Norm ln1;
    Linear q, k, v, proj;
    Norm ln2;
    Linear mlp1, mlp2;
    std::optional<TbWeights> tb;
};

struct ModelWeights {
    std::vector<EncoderWeights> encoders;

    /// Gaussian init with std `init_std`; TB layers start near identity.
    static ModelWeights random(const ModelConfig& cfg, std::uint64_t seed, double init_std = 0.02);
    /// Throws if shapes disagree with the workload or a reusing encoder lacks TB weights.
    void check(const Workload& workload) const;
};

enum class SimMode { Exact, Crossbar };

struct SimOptions {
    SimMode mode = SimMode::Exact;
    DeviceAssignment devices;
    TileConfig tiles;
    NoiseModel noise;
    int weight_bits = 8;
    int input_bits = 8;
    int input_split_bits = 1;
    /// Scale applied to Q K^T; 0 selects 1/sqrt(d).
    double attention_scale = 0.0;
};

struct ForwardStats {
    int attention_evaluations = 0;
    int tb_evaluations = 0;
    std::map<LayerKind, std::int64_t> programs;
    std::map<LayerKind, std::int64_t> noisy_programs;
    std::map<LayerKind, std::int64_t> noisy_reads;
};

/// Computes x * w for a layer, exactly or through simulated crossbars.
class MatmulEngine {
public:
    MatmulEngine(const SimOptions& options, ForwardStats& stats);

    Matrix multiply(const Matrix& x, const Matrix& w, LayerKind kind);
    Matrix linear(const Matrix& x, const Linear& layer, LayerKind kind);

private:
    const SimOptions& options_;
    ForwardStats& stats_;
    NoiseSource noise_;
};

/// Multi-head attention, heads concatenated to t x d. With `engine` null the
/// products are exact.
Matrix attention_forward(const Matrix& q, const Matrix& k, const Matrix& v, int n_heads,
                         double scale, MatmulEngine* engine = nullptr);

/// LayerNorm -> d x d affine -> GeLU.
Matrix tb_forward(const Matrix& attention, const TbWeights& tb, MatmulEngine* engine = nullptr);

struct ForwardResult {
    Matrix output;
    /// Per encoder: the tensor feeding its projection (attention or TB output).
    std::vector<Matrix> attention_outputs;
    ForwardStats stats;
};

/// Pre-norm encoder stack. Reusing encoders project tb_forward(source attention).
ForwardResult model_forward(const Workload& workload, const ModelWeights& weights,
                            const Matrix& input, const SimOptions& options);

/// Small model for demos and tests: d=64, t=32, 4 heads, 8 encoders.
ModelConfig toy_model_config();
/// Weights for the toy model. Attention weights drift from encoder to
/// encoder (W_i = rho W_{i-1} + sqrt(1 - rho^2) G_i) so neighbouring
/// encoders attend alike, as they do in trained models.
ModelWeights toy_model_weights(const ModelConfig& cfg, std::uint64_t seed, double rho = 0.8);
Matrix toy_input(const ModelConfig& cfg, std::uint64_t seed);

}  // namespace imcvit
