#include "sensekit/tensor.hpp"

#include <cmath>
#include <sstream>

#include "sensekit/errors.hpp"

namespace sensekit {

namespace {

std::size_t element_count(const std::vector<std::size_t>& shape) {
    std::size_t n = 1;
    for (std::size_t d : shape) n *= d;
    return n;
}

void require(bool ok, const std::string& message) {
    if (!ok) throw InputError(message);
}

} // namespace

Tensor::Tensor(std::vector<std::size_t> shape_in, std::vector<float> data_in)
    : shape(std::move(shape_in)), data(std::move(data_in)) {
    require(element_count(shape) == data.size(),
            "tensor: shape " + shape_str() + " does not match " +
                std::to_string(data.size()) + " values");
}

Tensor Tensor::zeros(std::vector<std::size_t> shape) {
    std::size_t n = element_count(shape);
    return Tensor(std::move(shape), std::vector<float>(n, 0.0f));
}

Tensor Tensor::full(std::vector<std::size_t> shape, float value) {
    std::size_t n = element_count(shape);
    return Tensor(std::move(shape), std::vector<float>(n, value));
}

Tensor Tensor::vector(std::vector<float> values) {
    std::size_t n = values.size();
    return Tensor({n}, std::move(values));
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols, std::vector<float> values) {
    return Tensor({rows, cols}, std::move(values));
}

Tensor Tensor::identity(std::size_t n) {
    Tensor t = zeros({n, n});
    for (std::size_t i = 0; i < n; ++i) t.at(i, i) = 1.0f;
    return t;
}

std::size_t Tensor::rows() const {
    if (shape.empty()) throw InputError("tensor: rows() on rank-0 tensor");
    return shape[0];
}

std::size_t Tensor::cols() const {
    if (shape.size() != 2) {
        throw InputError("tensor: cols() on non-matrix " + shape_str());
    }
    return shape[1];
}

std::string Tensor::shape_str() const {
    std::ostringstream out;
    out << "(";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i > 0) out << ", ";
        out << shape[i];
    }
    out << ")";
    return out.str();
}

void Gradient::set(const std::string& name, Tensor grad) {
    entries_[name] = std::move(grad);
}

void Gradient::accumulate(const std::string& name, const Tensor& grad) {
    auto it = entries_.find(name);
    if (it == entries_.end()) {
        entries_.emplace(name, grad);
        return;
    }
    if (!it->second.same_shape(grad)) {
        throw InputError("gradient: shape mismatch accumulating '" + name + "'");
    }
    for (std::size_t i = 0; i < grad.size(); ++i) it->second[i] += grad[i];
}

const Tensor& Gradient::at(const std::string& name) const {
    auto it = entries_.find(name);
    if (it == entries_.end()) {
        throw InputError("gradient: parameter '" + name + "' is not tracked");
    }
    return it->second;
}

bool Gradient::contains(const std::string& name) const {
    return entries_.count(name) != 0;
}

void Gradient::add_scaled(const Gradient& other, float factor) {
    for (const auto& [name, tensor] : other.entries()) {
        auto it = entries_.find(name);
        if (it == entries_.end()) {
            Tensor scaled = tensor;
            for (auto& v : scaled.data) v *= factor;
            entries_.emplace(name, std::move(scaled));
            continue;
        }
        if (!it->second.same_shape(tensor)) {
            throw InputError("gradient: shape mismatch accumulating '" + name + "'");
        }
        for (std::size_t i = 0; i < tensor.size(); ++i) {
            it->second[i] += factor * tensor[i];
        }
    }
}

void ensure_finite(const Tensor& t, const char* what) {
    for (float v : t.data) {
        if (!std::isfinite(v)) {
            throw NumericError(std::string(what) + ": non-finite value");
        }
    }
}

Tensor softmax(const Tensor& v) {
    if (v.size() == 0) throw InputError("softmax: empty input");
    ensure_finite(v, "softmax input");
    double max_logit = v[0];
    for (float x : v.data) max_logit = std::max(max_logit, static_cast<double>(x));
    double total = 0.0;
    std::vector<double> exps(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        exps[i] = std::exp(static_cast<double>(v[i]) - max_logit);
        total += exps[i];
    }
    Tensor out = Tensor::zeros(v.shape);
    for (std::size_t i = 0; i < v.size(); ++i) {
        out[i] = static_cast<float>(exps[i] / total);
    }
    ensure_finite(out, "softmax");
    return out;
}

Tensor layer_norm(const Tensor& v, const Tensor& gain, const Tensor& bias, double eps) {
    if (!v.same_shape(gain) || !v.same_shape(bias)) {
        throw InputError("layer_norm: length mismatch, input " + v.shape_str() +
                         " gain " + gain.shape_str() + " bias " + bias.shape_str());
    }
    if (eps <= 0.0) throw InputError("layer_norm: eps must be positive");
    if (v.size() == 0) throw InputError("layer_norm: empty input");
    double mean = 0.0;
    for (float x : v.data) mean += x;
    mean /= static_cast<double>(v.size());
    double var = 0.0;
    for (float x : v.data) {
        double d = x - mean;
        var += d * d;
    }
    var /= static_cast<double>(v.size());
    double inv_std = 1.0 / std::sqrt(var + eps);
    Tensor out = Tensor::zeros(v.shape);
    for (std::size_t i = 0; i < v.size(); ++i) {
        double normalized = (v[i] - mean) * inv_std;
        out[i] = static_cast<float>(gain[i] * normalized + bias[i]);
    }
    ensure_finite(out, "layer_norm");
    return out;
}

Tensor matmul(const Tensor& a, const Tensor& b) {
    if (!a.is_matrix() || !b.is_matrix() || a.cols() != b.rows()) {
        throw InputError("matmul: dimension mismatch " + a.shape_str() + " x " +
                         b.shape_str());
    }
    const std::size_t rows = a.rows();
    const std::size_t inner = a.cols();
    const std::size_t cols = b.cols();
    Tensor out = Tensor::zeros({rows, cols});
    // Fixed i,j,k loop order: summation order is part of the contract.
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < cols; ++j) {
            double acc = 0.0;
            for (std::size_t k = 0; k < inner; ++k) {
                acc += static_cast<double>(a.at(i, k)) * b.at(k, j);
            }
            out.at(i, j) = static_cast<float>(acc);
        }
    }
    ensure_finite(out, "matmul");
    return out;
}

Tensor matvec(const Tensor& m, const Tensor& v) {
    if (!m.is_matrix() || !v.is_vector() || m.cols() != v.size()) {
        throw InputError("matvec: dimension mismatch " + m.shape_str() + " x " +
                         v.shape_str());
    }
    Tensor out = Tensor::zeros({m.rows()});
    for (std::size_t i = 0; i < m.rows(); ++i) {
        double acc = 0.0;
        for (std::size_t k = 0; k < v.size(); ++k) {
            acc += static_cast<double>(m.at(i, k)) * v[k];
        }
        out[i] = static_cast<float>(acc);
    }
    ensure_finite(out, "matvec");
    return out;
}

Tensor relu(const Tensor& v) {
    Tensor out = v;
    for (auto& x : out.data) x = x > 0.0f ? x : 0.0f;
    ensure_finite(out, "relu");
    return out;
}

Tensor sigmoid(const Tensor& v) {
    Tensor out = Tensor::zeros(v.shape);
    for (std::size_t i = 0; i < v.size(); ++i) {
        double x = v[i];
        double s = x >= 0.0 ? 1.0 / (1.0 + std::exp(-x))
                            : std::exp(x) / (1.0 + std::exp(x));
        out[i] = static_cast<float>(s);
    }
    ensure_finite(out, "sigmoid");
    return out;
}

namespace {

Tensor binary_op(const Tensor& a, const Tensor& b, const char* what,
                 float (*op)(float, float)) {
    if (!a.same_shape(b)) {
        throw InputError(std::string(what) + ": shape mismatch " + a.shape_str() +
                         " vs " + b.shape_str());
    }
    Tensor out = Tensor::zeros(a.shape);
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = op(a[i], b[i]);
    ensure_finite(out, what);
    return out;
}

} // namespace

Tensor add(const Tensor& a, const Tensor& b) {
    return binary_op(a, b, "add", [](float x, float y) { return x + y; });
}

Tensor sub(const Tensor& a, const Tensor& b) {
    return binary_op(a, b, "sub", [](float x, float y) { return x - y; });
}

Tensor mul(const Tensor& a, const Tensor& b) {
    return binary_op(a, b, "mul", [](float x, float y) { return x * y; });
}

Tensor scale(const Tensor& a, float factor) {
    Tensor out = a;
    for (auto& x : out.data) x *= factor;
    ensure_finite(out, "scale");
    return out;
}

double dot(const Tensor& a, const Tensor& b) {
    if (a.size() != b.size()) {
        throw InputError("dot: length mismatch " + a.shape_str() + " vs " +
                         b.shape_str());
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        acc += static_cast<double>(a[i]) * b[i];
    }
    return acc;
}

double norm2(const Tensor& a) {
    return std::sqrt(dot(a, a));
}

double cosine(const Tensor& a, const Tensor& b) {
    double na = norm2(a);
    double nb = norm2(b);
    // Zero vectors have no direction; report the minimum similarity so they
    // are never preferred over any real match.
    if (na == 0.0 || nb == 0.0) return -1.0;
    return dot(a, b) / (na * nb);
}

} // namespace sensekit
