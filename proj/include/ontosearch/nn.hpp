#ifndef ONTOSEARCH_NN_HPP
#define ONTOSEARCH_NN_HPP

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace ontosearch::nn {

// Sequence activations are (len x channels) row-major in spirit: one row
// per token position. Biases are stored as (n x 1) so a single optimizer
// and checkpoint path covers every parameter.
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Deterministic uniform doubles, identical across platforms for a seed.
class Rng {
public:
    explicit Rng(uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ULL) {}

    uint64_t next_u64();
    double uniform();                       // [0, 1)
    double uniform(double lo, double hi);   // [lo, hi)
    int uniform_int(int lo, int hi);        // [lo, hi] inclusive

private:
    uint64_t state_;
};

/// Named view of one trainable parameter and its gradient accumulator.
struct ParamRef {
    std::string name;
    Matrix* value = nullptr;
    Matrix* grad = nullptr;
    std::vector<int> shape; // checkpoint shape; product equals value->size()
};

// elementwise / rowwise activations
Matrix relu(const Matrix& x);
Matrix sigmoid(const Matrix& x);
Matrix tanh_act(const Matrix& x);
Matrix softmax_rows(const Matrix& x);

// activation backward passes; "output" is the cached forward result
Matrix relu_backward(const Matrix& d_out, const Matrix& input);
Matrix sigmoid_backward(const Matrix& d_out, const Matrix& output);
Matrix tanh_backward(const Matrix& d_out, const Matrix& output);

/// 1-D convolution over a (len x in) sequence with zero same-padding, so
/// the output keeps one row per position. Odd width keeps the padding
/// symmetric.
class Conv1d {
public:
    Conv1d() = default;
    Conv1d(int in_channels, int out_channels, int width);

    void init_glorot(Rng& rng);

    Matrix apply(const Matrix& input) const; // pure forward
    Matrix forward(const Matrix& input);     // caches input for backward
    Matrix backward(const Matrix& d_output); // accumulates grads, returns d_input
    void zero_grad();
    void collect_params(const std::string& prefix, std::vector<ParamRef>& out);

    int in_channels() const { return in_; }
    int out_channels() const { return out_; }
    int width() const { return width_; }

    Matrix weight;      // out x (in*width); column i*width + tap
    Matrix bias;        // out x 1
    Matrix weight_grad;
    Matrix bias_grad;

private:
    Matrix gather_windows(const Matrix& input) const; // len x (in*width)
    int in_ = 0, out_ = 0, width_ = 0;
    Matrix cached_windows_;
    bool has_cache_ = false;
};

/// Per-position affine map, applied independently to every row.
class Dense {
public:
    Dense() = default;
    Dense(int in_features, int out_features);

    void init_glorot(Rng& rng);

    Matrix apply(const Matrix& input) const;
    Matrix forward(const Matrix& input);
    Matrix backward(const Matrix& d_output);
    void zero_grad();
    void collect_params(const std::string& prefix, std::vector<ParamRef>& out);

    int in_features() const { return in_; }
    int out_features() const { return out_; }

    Matrix weight; // out x in
    Matrix bias;   // out x 1
    Matrix weight_grad;
    Matrix bias_grad;

private:
    int in_ = 0, out_ = 0;
    Matrix cached_input_;
    bool has_cache_ = false;
};

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

/// Adam with bias correction; moment buffers are keyed by parameter order,
/// which must stay stable across steps.
class Adam {
public:
    Adam(AdamConfig config, const std::vector<ParamRef>& params);

    void step(const std::vector<ParamRef>& params);
    long steps_taken() const { return t_; }

private:
    AdamConfig config_;
    std::vector<Matrix> m_, v_;
    long t_ = 0;
};

void zero_grads(const std::vector<ParamRef>& params);

/// Max over parameters of |analytic - numeric| / max(1e-8, |analytic| + |numeric|)
/// with central finite differences of the supplied loss.
double gradient_check(const std::vector<ParamRef>& params,
                      const std::function<double()>& loss,
                      const std::function<void()>& compute_grads,
                      double h = 1e-5);

/// Checkpoint: {"config": <object>, "params": {name: {"shape", "data"}}}.
/// Doubles are written with 17 significant digits so reloads are bit-exact.
std::string checkpoint_to_json(const std::string& config_json,
                               const std::vector<ParamRef>& params);

/// Fills the referenced parameters from the checkpoint (shapes must match)
/// and returns the config block re-serialized.
std::string checkpoint_from_json(const std::string& text,
                                 const std::vector<ParamRef>& params);

} // namespace ontosearch::nn

#endif
