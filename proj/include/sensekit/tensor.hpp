#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace sensekit {

inline constexpr double kLayerNormEps = 1e-12;

/// Dense row-major f32 tensor. Storage is f32; reductions inside the ops
/// below accumulate in double. Every op validates that its output is
/// finite and throws NumericError otherwise.
struct Tensor {
    std::vector<std::size_t> shape;
    std::vector<float> data;

    Tensor() = default;
    Tensor(std::vector<std::size_t> shape_in, std::vector<float> data_in);

    static Tensor zeros(std::vector<std::size_t> shape);
    static Tensor full(std::vector<std::size_t> shape, float value);
    static Tensor vector(std::vector<float> values);
    static Tensor matrix(std::size_t rows, std::size_t cols, std::vector<float> values);
    static Tensor identity(std::size_t n);

    std::size_t size() const { return data.size(); }
    std::size_t rank() const { return shape.size(); }
    bool is_vector() const { return shape.size() == 1; }
    bool is_matrix() const { return shape.size() == 2; }
    std::size_t rows() const;
    std::size_t cols() const;

    float& at(std::size_t r, std::size_t c) { return data[r * cols() + c]; }
    float at(std::size_t r, std::size_t c) const { return data[r * cols() + c]; }
    float& operator[](std::size_t i) { return data[i]; }
    float operator[](std::size_t i) const { return data[i]; }

    bool same_shape(const Tensor& other) const { return shape == other.shape; }
    std::string shape_str() const;
};

/// Parameter-name keyed gradient tensors; each entry has the shape of its
/// parameter. Lookup of an untracked name is an error.
class Gradient {
public:
    void set(const std::string& name, Tensor grad);
    void accumulate(const std::string& name, const Tensor& grad);
    const Tensor& at(const std::string& name) const;
    bool contains(const std::string& name) const;
    std::size_t size() const { return entries_.size(); }
    const std::map<std::string, Tensor>& entries() const { return entries_; }
    void add_scaled(const Gradient& other, float factor = 1.0f);

private:
    std::map<std::string, Tensor> entries_;
};

/// Throws NumericError if any element is NaN/Inf.
void ensure_finite(const Tensor& t, const char* what);

Tensor softmax(const Tensor& v);
Tensor layer_norm(const Tensor& v, const Tensor& gain, const Tensor& bias,
                  double eps = kLayerNormEps);
Tensor matmul(const Tensor& a, const Tensor& b);
Tensor matvec(const Tensor& m, const Tensor& v);
Tensor relu(const Tensor& v);
Tensor sigmoid(const Tensor& v);
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, float factor);
double dot(const Tensor& a, const Tensor& b);
double norm2(const Tensor& a);
double cosine(const Tensor& a, const Tensor& b);

} // namespace sensekit
