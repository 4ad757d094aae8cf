#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "sensekit/tensor.hpp"

namespace sensekit {

/// Reverse-mode tape recorded during one head forward pass. Node values are
/// held in double; backward() emits f32 gradients keyed by parameter name.
/// The op set is exactly what the disambiguation heads need; the encoder
/// never goes on the tape.
class Tape {
public:
    using NodeId = std::size_t;

    /// Constant leaf (hidden vectors, fixed matrices). No gradient tracked.
    NodeId input(const Tensor& value);
    /// Trainable leaf. The name keys the entry in the resulting Gradient.
    NodeId param(const std::string& name, const Tensor& value);

    NodeId add(NodeId a, NodeId b);
    NodeId mul(NodeId a, NodeId b);
    NodeId scale(NodeId a, double factor);
    NodeId sigmoid(NodeId a);
    NodeId matvec(NodeId m, NodeId v);
    NodeId dot(NodeId a, NodeId b);
    NodeId concat_scalars(const std::vector<NodeId>& scalars);
    NodeId softmax(NodeId v);
    /// sum_l weights[l] * values[l]; weights is a length-L vector node.
    NodeId weighted_sum(NodeId weights, const std::vector<NodeId>& values);
    /// -log softmax(logits)[gold]; scalar node, computed via log-sum-exp.
    NodeId nll(NodeId logits, std::size_t gold_index);

    const std::vector<double>& value(NodeId id) const;
    double scalar(NodeId id) const;
    Tensor value_tensor(NodeId id) const;

    /// Seeds the scalar loss node with `seed` and walks the tape in reverse.
    /// Returns one entry per registered parameter (zero where the loss does
    /// not depend on it).
    Gradient backward(NodeId loss, double seed = 1.0);

private:
    enum class Op {
        leaf,
        add,
        mul,
        scale,
        sigmoid,
        matvec,
        dot,
        concat,
        softmax,
        weighted_sum,
        nll,
    };

    struct Node {
        Op op = Op::leaf;
        std::vector<NodeId> parents;
        std::vector<double> value;
        std::size_t rows = 0;
        std::size_t cols = 1; // 1 for vectors/scalars
        std::string name;     // parameters only
        double factor = 0.0;  // scale
        std::size_t gold = 0; // nll
        std::vector<double> aux; // cached softmax probabilities
    };

    NodeId push(Node node);
    const Node& node(NodeId id) const;

    std::vector<Node> nodes_;
};

} // namespace sensekit
