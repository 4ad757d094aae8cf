#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <vector>

#include "sensekit/encoder.hpp"
#include "sensekit/heads.hpp"
#include "sensekit/tensor.hpp"

namespace py = pybind11;

namespace {

using Matrix = std::vector<std::vector<float>>;

sensekit::Tensor to_matrix(const Matrix& rows, const char* what) {
    if (rows.empty()) throw std::invalid_argument(std::string(what) + ": empty matrix");
    std::size_t cols = rows[0].size();
    std::vector<float> data;
    data.reserve(rows.size() * cols);
    for (const auto& row : rows) {
        if (row.size() != cols) {
            throw std::invalid_argument(std::string(what) + ": ragged matrix");
        }
        data.insert(data.end(), row.begin(), row.end());
    }
    return sensekit::Tensor::matrix(rows.size(), cols, std::move(data));
}

Matrix from_matrix(const sensekit::Tensor& t) {
    Matrix rows(t.rows(), std::vector<float>(t.cols()));
    for (std::size_t i = 0; i < t.rows(); ++i) {
        for (std::size_t j = 0; j < t.cols(); ++j) rows[i][j] = t.at(i, j);
    }
    return rows;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Core numeric operations of the sensekit WSD toolkit";

    m.def("softmax", [](const std::vector<float>& v) {
        return sensekit::softmax(sensekit::Tensor::vector(v)).data;
    }, py::arg("values"), "Numerically stable softmax over a vector");

    m.def("layer_norm",
          [](const std::vector<float>& v, const std::vector<float>& gain,
             const std::vector<float>& bias) {
              return sensekit::layer_norm(sensekit::Tensor::vector(v),
                                          sensekit::Tensor::vector(gain),
                                          sensekit::Tensor::vector(bias))
                  .data;
          },
          py::arg("values"), py::arg("gain"), py::arg("bias"));

    m.def("matmul", [](const Matrix& a, const Matrix& b) {
        return from_matrix(sensekit::matmul(to_matrix(a, "matmul"),
                                            to_matrix(b, "matmul")));
    }, py::arg("a"), py::arg("b"));

    m.def("attention",
          [](const std::vector<float>& q, const Matrix& keys, const Matrix& values,
             float rho) {
              return sensekit::attention(sensekit::Tensor::vector(q),
                                         to_matrix(keys, "attention"),
                                         to_matrix(values, "attention"), rho)
                  .data;
          },
          py::arg("q"), py::arg("keys"), py::arg("values"), py::arg("rho") = 1.0f,
          "Softmax-weighted sum of value columns; keys/values are column-per-item");

    m.def("glu",
          [](const std::vector<float>& h, const Matrix& w_h,
             const std::vector<float>& b_h, const Matrix& w_g,
             const std::vector<float>& b_g) {
              sensekit::GluParams params{to_matrix(w_h, "glu"), to_matrix(w_g, "glu"),
                                         sensekit::Tensor::vector(b_h),
                                         sensekit::Tensor::vector(b_g)};
              return sensekit::glu(sensekit::Tensor::vector(h), params).data;
          },
          py::arg("h"), py::arg("w_h"), py::arg("b_h"), py::arg("w_g"), py::arg("b_g"),
          "(h + W^h h + b^h) * sigmoid(W^g h + b^g)");

    m.def("layer_weighted",
          [](const Matrix& layers, const std::vector<float>& m_vec, const Matrix& w_s) {
              if (layers.empty()) throw std::invalid_argument("layer_weighted: no layers");
              std::size_t d = layers[0].size();
              sensekit::HiddenStack stack =
                  sensekit::HiddenStack::zeros(layers.size(), 1, d);
              for (std::size_t l = 0; l < layers.size(); ++l) {
                  if (layers[l].size() != d) {
                      throw std::invalid_argument("layer_weighted: ragged layers");
                  }
                  auto row = stack.at(l + 1, 0);
                  std::copy(layers[l].begin(), layers[l].end(), row.begin());
              }
              sensekit::LayerAttention att{sensekit::Tensor::vector(m_vec),
                                           to_matrix(w_s, "layer_weighted")};
              return sensekit::layer_weighted(stack, 0, att).data;
          },
          py::arg("layers"), py::arg("m"), py::arg("w_s"),
          "Attention pooling over a word's per-layer vectors (rho = 1)");

    m.def("cosine", [](const std::vector<float>& a, const std::vector<float>& b) {
        return sensekit::cosine(sensekit::Tensor::vector(a),
                                sensekit::Tensor::vector(b));
    }, py::arg("a"), py::arg("b"));

#ifdef VERSION_INFO
    m.attr("__version__") = VERSION_INFO;
#else
    m.attr("__version__") = "dev";
#endif
}
