#include "ontosearch/nn.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "ontosearch/errors.hpp"
#include "ontosearch/io.hpp"

using nlohmann::json;

namespace ontosearch::nn {

uint64_t Rng::next_u64() {
    // splitmix64
    state_ += 0x9e3779b97f4a7c15ULL;
    uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

double Rng::uniform() {
    return (double)(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) {
    return lo + (hi - lo) * uniform();
}

int Rng::uniform_int(int lo, int hi) {
    return lo + (int)(next_u64() % (uint64_t)(hi - lo + 1));
}

Matrix relu(const Matrix& x) {
    return x.cwiseMax(0.0);
}

Matrix sigmoid(const Matrix& x) {
    return x.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
}

Matrix tanh_act(const Matrix& x) {
    return x.array().tanh().matrix();
}

Matrix softmax_rows(const Matrix& x) {
    Matrix out(x.rows(), x.cols());
    for (Eigen::Index r = 0; r < x.rows(); r++) {
        double mx = x.row(r).maxCoeff();
        Eigen::ArrayXd e = (x.row(r).array() - mx).exp();
        out.row(r) = (e / e.sum()).matrix();
    }
    return out;
}

Matrix relu_backward(const Matrix& d_out, const Matrix& input) {
    return (input.array() > 0.0).select(d_out, Matrix::Zero(d_out.rows(), d_out.cols()));
}

Matrix sigmoid_backward(const Matrix& d_out, const Matrix& output) {
    return d_out.cwiseProduct(output.cwiseProduct(Matrix::Ones(output.rows(), output.cols()) - output));
}

Matrix tanh_backward(const Matrix& d_out, const Matrix& output) {
    return d_out.cwiseProduct((1.0 - output.array().square()).matrix());
}

Conv1d::Conv1d(int in_channels, int out_channels, int width)
    : in_(in_channels), out_(out_channels), width_(width) {
    if (width <= 0 || width % 2 == 0)
        throw DomainError("conv1d width must be odd and positive, got " + std::to_string(width));
    weight = Matrix::Zero(out_, in_ * width_);
    bias = Matrix::Zero(out_, 1);
    zero_grad();
}

void Conv1d::init_glorot(Rng& rng) {
    double fan_in = (double)in_ * width_;
    double fan_out = (double)out_ * width_;
    double bound = std::sqrt(6.0 / (fan_in + fan_out));
    for (Eigen::Index r = 0; r < weight.rows(); r++)
        for (Eigen::Index c = 0; c < weight.cols(); c++)
            weight(r, c) = rng.uniform(-bound, bound);
    bias.setZero();
}

Matrix Conv1d::gather_windows(const Matrix& input) const {
    if (input.cols() != in_)
        throw DomainError("conv1d: expected " + std::to_string(in_) + " input channels, got " +
                          std::to_string(input.cols()));
    Eigen::Index len = input.rows();
    int half = width_ / 2;
    Matrix windows = Matrix::Zero(len, (Eigen::Index)in_ * width_);
    for (Eigen::Index t = 0; t < len; t++)
        for (int k = 0; k < width_; k++) {
            Eigen::Index src = t - half + k;
            if (src < 0 || src >= len) continue;
            for (int i = 0; i < in_; i++) windows(t, (Eigen::Index)i * width_ + k) = input(src, i);
        }
    return windows;
}

Matrix Conv1d::apply(const Matrix& input) const {
    Matrix windows = gather_windows(input);
    Matrix out = windows * weight.transpose();
    out.rowwise() += bias.col(0).transpose();
    return out;
}

Matrix Conv1d::forward(const Matrix& input) {
    cached_windows_ = gather_windows(input);
    has_cache_ = true;
    Matrix out = cached_windows_ * weight.transpose();
    out.rowwise() += bias.col(0).transpose();
    return out;
}

Matrix Conv1d::backward(const Matrix& d_output) {
    if (!has_cache_) throw DomainError("conv1d: backward called before forward");
    Eigen::Index len = cached_windows_.rows();
    if (d_output.rows() != len || d_output.cols() != out_)
        throw DomainError("conv1d: gradient shape mismatch");

    weight_grad += d_output.transpose() * cached_windows_;
    bias_grad += d_output.colwise().sum().transpose();

    Matrix d_windows = d_output * weight; // len x (in*width)
    Matrix d_input = Matrix::Zero(len, in_);
    int half = width_ / 2;
    for (Eigen::Index t = 0; t < len; t++)
        for (int k = 0; k < width_; k++) {
            Eigen::Index src = t - half + k;
            if (src < 0 || src >= len) continue;
            for (int i = 0; i < in_; i++)
                d_input(src, i) += d_windows(t, (Eigen::Index)i * width_ + k);
        }
    return d_input;
}

void Conv1d::zero_grad() {
    weight_grad = Matrix::Zero(out_, (Eigen::Index)in_ * width_);
    bias_grad = Matrix::Zero(out_, 1);
}

void Conv1d::collect_params(const std::string& prefix, std::vector<ParamRef>& out) {
    out.push_back({prefix + ".weight", &weight, &weight_grad, {out_, in_, width_}});
    out.push_back({prefix + ".bias", &bias, &bias_grad, {out_}});
}

Dense::Dense(int in_features, int out_features) : in_(in_features), out_(out_features) {
    weight = Matrix::Zero(out_, in_);
    bias = Matrix::Zero(out_, 1);
    zero_grad();
}

void Dense::init_glorot(Rng& rng) {
    double bound = std::sqrt(6.0 / ((double)in_ + out_));
    for (Eigen::Index r = 0; r < weight.rows(); r++)
        for (Eigen::Index c = 0; c < weight.cols(); c++)
            weight(r, c) = rng.uniform(-bound, bound);
    bias.setZero();
}

Matrix Dense::apply(const Matrix& input) const {
    if (input.cols() != in_)
        throw DomainError("dense: expected " + std::to_string(in_) + " features, got " +
                          std::to_string(input.cols()));
    Matrix out = input * weight.transpose();
    out.rowwise() += bias.col(0).transpose();
    return out;
}

Matrix Dense::forward(const Matrix& input) {
    cached_input_ = input;
    has_cache_ = true;
    return apply(input);
}

Matrix Dense::backward(const Matrix& d_output) {
    if (!has_cache_) throw DomainError("dense: backward called before forward");
    if (d_output.rows() != cached_input_.rows() || d_output.cols() != out_)
        throw DomainError("dense: gradient shape mismatch");
    weight_grad += d_output.transpose() * cached_input_;
    bias_grad += d_output.colwise().sum().transpose();
    return d_output * weight;
}

void Dense::zero_grad() {
    weight_grad = Matrix::Zero(out_, in_);
    bias_grad = Matrix::Zero(out_, 1);
}

void Dense::collect_params(const std::string& prefix, std::vector<ParamRef>& out) {
    out.push_back({prefix + ".weight", &weight, &weight_grad, {out_, in_}});
    out.push_back({prefix + ".bias", &bias, &bias_grad, {out_}});
}

Adam::Adam(AdamConfig config, const std::vector<ParamRef>& params) : config_(config) {
    if (!(config_.beta1 > 0 && config_.beta1 < 1) || !(config_.beta2 > 0 && config_.beta2 < 1) ||
        config_.eps <= 0)
        throw DomainError("adam: invalid hyperparameters");
    for (const auto& p : params) {
        m_.push_back(Matrix::Zero(p.value->rows(), p.value->cols()));
        v_.push_back(Matrix::Zero(p.value->rows(), p.value->cols()));
    }
}

void Adam::step(const std::vector<ParamRef>& params) {
    if (params.size() != m_.size()) throw DomainError("adam: parameter set changed");
    t_++;
    double bc1 = 1.0 - std::pow(config_.beta1, (double)t_);
    double bc2 = 1.0 - std::pow(config_.beta2, (double)t_);
    for (size_t i = 0; i < params.size(); i++) {
        const Matrix& g = *params[i].grad;
        m_[i] = config_.beta1 * m_[i] + (1.0 - config_.beta1) * g;
        v_[i] = config_.beta2 * v_[i] + (1.0 - config_.beta2) * g.cwiseProduct(g);
        Matrix m_hat = m_[i] / bc1;
        Matrix v_hat = v_[i] / bc2;
        params[i].value->array() -=
            config_.lr * m_hat.array() / (v_hat.array().sqrt() + config_.eps);
    }
}

void zero_grads(const std::vector<ParamRef>& params) {
    for (const auto& p : params) p.grad->setZero();
}

double gradient_check(const std::vector<ParamRef>& params,
                      const std::function<double()>& loss,
                      const std::function<void()>& compute_grads,
                      double h) {
    compute_grads();
    std::vector<Matrix> analytic;
    analytic.reserve(params.size());
    for (const auto& p : params) analytic.push_back(*p.grad);

    double max_rel = 0;
    for (size_t i = 0; i < params.size(); i++) {
        Matrix& value = *params[i].value;
        for (Eigen::Index idx = 0; idx < value.size(); idx++) {
            double orig = value.data()[idx];
            value.data()[idx] = orig + h;
            double up = loss();
            value.data()[idx] = orig - h;
            double down = loss();
            value.data()[idx] = orig;
            double numeric = (up - down) / (2.0 * h);
            double a = analytic[i].data()[idx];
            double rel = std::abs(a - numeric) / std::max(1e-8, std::abs(a) + std::abs(numeric));
            max_rel = std::max(max_rel, rel);
        }
    }
    return max_rel;
}

std::string checkpoint_to_json(const std::string& config_json,
                               const std::vector<ParamRef>& params) {
    std::vector<const ParamRef*> sorted;
    for (const auto& p : params) sorted.push_back(&p);
    std::sort(sorted.begin(), sorted.end(),
              [](const ParamRef* a, const ParamRef* b) { return a->name < b->name; });

    std::string out = "{\"config\":" + config_json + ",\"params\":{";
    for (size_t i = 0; i < sorted.size(); i++) {
        const ParamRef& p = *sorted[i];
        long product = 1;
        for (int d : p.shape) product *= d;
        if (product != (long)p.value->size())
            throw DomainError("checkpoint: shape/value size mismatch for " + p.name);
        if (i) out.push_back(',');
        out += "\"" + p.name + "\":{\"shape\":[";
        for (size_t d = 0; d < p.shape.size(); d++) {
            if (d) out.push_back(',');
            out += std::to_string(p.shape[d]);
        }
        out += "],\"data\":[";
        const Matrix& m = *p.value;
        bool first = true;
        for (Eigen::Index r = 0; r < m.rows(); r++)
            for (Eigen::Index c = 0; c < m.cols(); c++) {
                if (!first) out.push_back(',');
                first = false;
                out += format_double(m(r, c));
            }
        out += "]}";
    }
    out += "}}\n";
    return out;
}

std::string checkpoint_from_json(const std::string& text,
                                 const std::vector<ParamRef>& params) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("checkpoint: ") + e.what());
    }
    if (!j.contains("config") || !j.contains("params"))
        throw ParseError("checkpoint: missing 'config' or 'params'");

    const json& jp = j["params"];
    std::map<std::string, const ParamRef*> by_name;
    for (const auto& p : params) by_name[p.name] = &p;
    for (const auto& [name, entry] : jp.items())
        if (!by_name.count(name))
            throw ParseError("checkpoint: unknown parameter '" + name + "'");

    for (const auto& p : params) {
        if (!jp.contains(p.name))
            throw ParseError("checkpoint: missing parameter '" + p.name + "'");
        const json& entry = jp[p.name];
        std::vector<int> shape;
        for (const auto& d : entry.at("shape")) shape.push_back(d.get<int>());
        if (shape != p.shape)
            throw ParseError("checkpoint: shape mismatch for '" + p.name + "'");
        const json& data = entry.at("data");
        Matrix& m = *p.value;
        if ((Eigen::Index)data.size() != m.size())
            throw ParseError("checkpoint: data length mismatch for '" + p.name + "'");
        Eigen::Index idx = 0;
        for (Eigen::Index r = 0; r < m.rows(); r++)
            for (Eigen::Index c = 0; c < m.cols(); c++) m(r, c) = data[idx++].get<double>();
    }
    return j["config"].dump();
}

} // namespace ontosearch::nn
