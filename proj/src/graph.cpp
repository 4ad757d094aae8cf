#include "sensekit/graph.hpp"

#include <cmath>

#include "sensekit/errors.hpp"

namespace sensekit {

namespace {

void require(bool ok, const std::string& message) {
    if (!ok) throw InputError(message);
}

} // namespace

Tape::NodeId Tape::push(Node node) {
    for (double v : node.value) {
        if (!std::isfinite(v)) throw NumericError("tape: non-finite node value");
    }
    nodes_.push_back(std::move(node));
    return nodes_.size() - 1;
}

const Tape::Node& Tape::node(NodeId id) const {
    require(id < nodes_.size(), "tape: invalid node id");
    return nodes_[id];
}

Tape::NodeId Tape::input(const Tensor& value) {
    Node n;
    n.op = Op::leaf;
    n.rows = value.is_matrix() ? value.rows() : value.size();
    n.cols = value.is_matrix() ? value.cols() : 1;
    n.value.assign(value.data.begin(), value.data.end());
    return push(std::move(n));
}

Tape::NodeId Tape::param(const std::string& name, const Tensor& value) {
    require(!name.empty(), "tape: parameter name must be non-empty");
    NodeId id = input(value);
    nodes_[id].name = name;
    return id;
}

Tape::NodeId Tape::add(NodeId a, NodeId b) {
    const Node& na = node(a);
    const Node& nb = node(b);
    require(na.value.size() == nb.value.size(), "tape add: shape mismatch");
    Node n;
    n.op = Op::add;
    n.parents = {a, b};
    n.rows = na.rows;
    n.cols = na.cols;
    n.value.resize(na.value.size());
    for (std::size_t i = 0; i < n.value.size(); ++i) {
        n.value[i] = na.value[i] + nb.value[i];
    }
    return push(std::move(n));
}

Tape::NodeId Tape::mul(NodeId a, NodeId b) {
    const Node& na = node(a);
    const Node& nb = node(b);
    require(na.value.size() == nb.value.size(), "tape mul: shape mismatch");
    Node n;
    n.op = Op::mul;
    n.parents = {a, b};
    n.rows = na.rows;
    n.cols = na.cols;
    n.value.resize(na.value.size());
    for (std::size_t i = 0; i < n.value.size(); ++i) {
        n.value[i] = na.value[i] * nb.value[i];
    }
    return push(std::move(n));
}

Tape::NodeId Tape::scale(NodeId a, double factor) {
    const Node& na = node(a);
    Node n;
    n.op = Op::scale;
    n.parents = {a};
    n.rows = na.rows;
    n.cols = na.cols;
    n.factor = factor;
    n.value.resize(na.value.size());
    for (std::size_t i = 0; i < n.value.size(); ++i) {
        n.value[i] = factor * na.value[i];
    }
    return push(std::move(n));
}

Tape::NodeId Tape::sigmoid(NodeId a) {
    const Node& na = node(a);
    Node n;
    n.op = Op::sigmoid;
    n.parents = {a};
    n.rows = na.rows;
    n.cols = na.cols;
    n.value.resize(na.value.size());
    for (std::size_t i = 0; i < n.value.size(); ++i) {
        double x = na.value[i];
        n.value[i] = x >= 0.0 ? 1.0 / (1.0 + std::exp(-x))
                              : std::exp(x) / (1.0 + std::exp(x));
    }
    return push(std::move(n));
}

Tape::NodeId Tape::matvec(NodeId m, NodeId v) {
    const Node& nm = node(m);
    const Node& nv = node(v);
    require(nm.cols == nv.rows && nv.cols == 1, "tape matvec: shape mismatch");
    Node n;
    n.op = Op::matvec;
    n.parents = {m, v};
    n.rows = nm.rows;
    n.cols = 1;
    n.value.resize(nm.rows);
    for (std::size_t i = 0; i < nm.rows; ++i) {
        double acc = 0.0;
        for (std::size_t k = 0; k < nm.cols; ++k) {
            acc += nm.value[i * nm.cols + k] * nv.value[k];
        }
        n.value[i] = acc;
    }
    return push(std::move(n));
}

Tape::NodeId Tape::dot(NodeId a, NodeId b) {
    const Node& na = node(a);
    const Node& nb = node(b);
    require(na.value.size() == nb.value.size(), "tape dot: length mismatch");
    Node n;
    n.op = Op::dot;
    n.parents = {a, b};
    n.rows = 1;
    n.cols = 1;
    double acc = 0.0;
    for (std::size_t i = 0; i < na.value.size(); ++i) {
        acc += na.value[i] * nb.value[i];
    }
    n.value = {acc};
    return push(std::move(n));
}

Tape::NodeId Tape::concat_scalars(const std::vector<NodeId>& scalars) {
    require(!scalars.empty(), "tape concat: empty list");
    Node n;
    n.op = Op::concat;
    n.parents = scalars;
    n.rows = scalars.size();
    n.cols = 1;
    n.value.resize(scalars.size());
    for (std::size_t i = 0; i < scalars.size(); ++i) {
        const Node& s = node(scalars[i]);
        require(s.value.size() == 1, "tape concat: non-scalar element");
        n.value[i] = s.value[0];
    }
    return push(std::move(n));
}

Tape::NodeId Tape::softmax(NodeId v) {
    const Node& nv = node(v);
    require(!nv.value.empty() && nv.cols == 1, "tape softmax: needs a vector");
    Node n;
    n.op = Op::softmax;
    n.parents = {v};
    n.rows = nv.rows;
    n.cols = 1;
    double max_logit = nv.value[0];
    for (double x : nv.value) max_logit = std::max(max_logit, x);
    double total = 0.0;
    n.value.resize(nv.value.size());
    for (std::size_t i = 0; i < nv.value.size(); ++i) {
        n.value[i] = std::exp(nv.value[i] - max_logit);
        total += n.value[i];
    }
    for (auto& x : n.value) x /= total;
    return push(std::move(n));
}

Tape::NodeId Tape::weighted_sum(NodeId weights, const std::vector<NodeId>& values) {
    const Node& nw = node(weights);
    require(nw.value.size() == values.size() && !values.empty(),
            "tape weighted_sum: weight count must match value count");
    const std::size_t dim = node(values[0]).value.size();
    Node n;
    n.op = Op::weighted_sum;
    n.parents.push_back(weights);
    for (NodeId v : values) {
        require(node(v).value.size() == dim, "tape weighted_sum: ragged values");
        n.parents.push_back(v);
    }
    n.rows = dim;
    n.cols = 1;
    n.value.assign(dim, 0.0);
    for (std::size_t l = 0; l < values.size(); ++l) {
        const Node& nv = node(values[l]);
        for (std::size_t i = 0; i < dim; ++i) {
            n.value[i] += nw.value[l] * nv.value[i];
        }
    }
    return push(std::move(n));
}

Tape::NodeId Tape::nll(NodeId logits, std::size_t gold_index) {
    const Node& nl = node(logits);
    require(gold_index < nl.value.size(),
            "tape nll: gold index " + std::to_string(gold_index) +
                " outside support of size " + std::to_string(nl.value.size()));
    Node n;
    n.op = Op::nll;
    n.parents = {logits};
    n.rows = 1;
    n.cols = 1;
    n.gold = gold_index;
    double max_logit = nl.value[0];
    for (double x : nl.value) max_logit = std::max(max_logit, x);
    double total = 0.0;
    n.aux.resize(nl.value.size());
    for (std::size_t i = 0; i < nl.value.size(); ++i) {
        n.aux[i] = std::exp(nl.value[i] - max_logit);
        total += n.aux[i];
    }
    for (auto& p : n.aux) p /= total;
    n.value = {std::log(total) - (nl.value[gold_index] - max_logit)};
    return push(std::move(n));
}

const std::vector<double>& Tape::value(NodeId id) const {
    return node(id).value;
}

double Tape::scalar(NodeId id) const {
    const Node& n = node(id);
    require(n.value.size() == 1, "tape: node is not a scalar");
    return n.value[0];
}

Tensor Tape::value_tensor(NodeId id) const {
    const Node& n = node(id);
    std::vector<float> data(n.value.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        data[i] = static_cast<float>(n.value[i]);
    }
    if (n.cols == 1) return Tensor::vector(std::move(data));
    return Tensor::matrix(n.rows, n.cols, std::move(data));
}

Gradient Tape::backward(NodeId loss, double seed) {
    const Node& loss_node = node(loss);
    require(loss_node.value.size() == 1, "tape backward: loss must be scalar");

    std::vector<std::vector<double>> grads(nodes_.size());
    grads[loss].assign(1, seed);

    // Creation order is topological, so one reverse sweep suffices.
    for (std::size_t idx = nodes_.size(); idx-- > 0;) {
        const Node& n = nodes_[idx];
        if (grads[idx].empty()) continue;
        const std::vector<double>& g = grads[idx];
        auto grad_of = [&](NodeId p) -> std::vector<double>& {
            if (grads[p].empty()) grads[p].assign(nodes_[p].value.size(), 0.0);
            return grads[p];
        };
        switch (n.op) {
        case Op::leaf:
            break;
        case Op::add: {
            for (NodeId p : n.parents) {
                auto& gp = grad_of(p);
                for (std::size_t i = 0; i < g.size(); ++i) gp[i] += g[i];
            }
            break;
        }
        case Op::mul: {
            const Node& a = nodes_[n.parents[0]];
            const Node& b = nodes_[n.parents[1]];
            auto& ga = grad_of(n.parents[0]);
            auto& gb = grad_of(n.parents[1]);
            for (std::size_t i = 0; i < g.size(); ++i) {
                ga[i] += g[i] * b.value[i];
                gb[i] += g[i] * a.value[i];
            }
            break;
        }
        case Op::scale: {
            auto& gp = grad_of(n.parents[0]);
            for (std::size_t i = 0; i < g.size(); ++i) gp[i] += g[i] * n.factor;
            break;
        }
        case Op::sigmoid: {
            auto& gp = grad_of(n.parents[0]);
            for (std::size_t i = 0; i < g.size(); ++i) {
                gp[i] += g[i] * n.value[i] * (1.0 - n.value[i]);
            }
            break;
        }
        case Op::matvec: {
            const Node& m = nodes_[n.parents[0]];
            const Node& v = nodes_[n.parents[1]];
            auto& gm = grad_of(n.parents[0]);
            auto& gv = grad_of(n.parents[1]);
            for (std::size_t i = 0; i < m.rows; ++i) {
                for (std::size_t k = 0; k < m.cols; ++k) {
                    gm[i * m.cols + k] += g[i] * v.value[k];
                    gv[k] += g[i] * m.value[i * m.cols + k];
                }
            }
            break;
        }
        case Op::dot: {
            const Node& a = nodes_[n.parents[0]];
            const Node& b = nodes_[n.parents[1]];
            auto& ga = grad_of(n.parents[0]);
            auto& gb = grad_of(n.parents[1]);
            for (std::size_t i = 0; i < a.value.size(); ++i) {
                ga[i] += g[0] * b.value[i];
                gb[i] += g[0] * a.value[i];
            }
            break;
        }
        case Op::concat: {
            for (std::size_t i = 0; i < n.parents.size(); ++i) {
                grad_of(n.parents[i])[0] += g[i];
            }
            break;
        }
        case Op::softmax: {
            auto& gp = grad_of(n.parents[0]);
            double weighted = 0.0;
            for (std::size_t i = 0; i < g.size(); ++i) weighted += g[i] * n.value[i];
            for (std::size_t i = 0; i < g.size(); ++i) {
                gp[i] += n.value[i] * (g[i] - weighted);
            }
            break;
        }
        case Op::weighted_sum: {
            const Node& w = nodes_[n.parents[0]];
            auto& gw = grad_of(n.parents[0]);
            for (std::size_t l = 0; l + 1 < n.parents.size(); ++l) {
                const Node& v = nodes_[n.parents[l + 1]];
                auto& gv = grad_of(n.parents[l + 1]);
                double acc = 0.0;
                for (std::size_t i = 0; i < g.size(); ++i) {
                    acc += g[i] * v.value[i];
                    gv[i] += g[i] * w.value[l];
                }
                gw[l] += acc;
            }
            break;
        }
        case Op::nll: {
            auto& gp = grad_of(n.parents[0]);
            for (std::size_t i = 0; i < gp.size(); ++i) {
                double onehot = i == n.gold ? 1.0 : 0.0;
                gp[i] += g[0] * (n.aux[i] - onehot);
            }
            break;
        }
        }
    }

    Gradient result;
    for (std::size_t idx = 0; idx < nodes_.size(); ++idx) {
        const Node& n = nodes_[idx];
        if (n.name.empty()) continue;
        std::vector<float> data(n.value.size(), 0.0f);
        if (!grads[idx].empty()) {
            for (std::size_t i = 0; i < data.size(); ++i) {
                data[i] = static_cast<float>(grads[idx][i]);
            }
        }
        Tensor t = n.cols == 1 ? Tensor::vector(std::move(data))
                               : Tensor::matrix(n.rows, n.cols, std::move(data));
        ensure_finite(t, "tape gradient");
        result.accumulate(n.name, t);
    }
    return result;
}

} // namespace sensekit
