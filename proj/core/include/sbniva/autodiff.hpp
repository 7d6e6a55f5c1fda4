#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sbniva/common.hpp"

namespace sbniva::ad {

class Tape;

// Handle to a node on a tape. Cheap to copy; valid as long as the tape lives.
class Value {
  public:
    Value() = default;

    const Vec& data() const;
    const Vec& grad() const;
    double scalar() const;  // requires a 1-element node
    std::size_t size() const;
    std::size_t rows() const;
    std::size_t cols() const;
    bool requires_grad() const;
    bool valid() const { return tape_ != nullptr; }
    Tape* tape() const { return tape_; }
    int id() const { return id_; }

  private:
    friend class Tape;
    Value(Tape* tape, int id) : tape_(tape), id_(id) {}
    Tape* tape_ = nullptr;
    int id_ = -1;
};

// Reverse-mode tape. Nodes are created in topological order by construction,
// so the backward sweep is a single reverse pass over creation order.
// One tape serves one forward+backward pass; gradients accumulate across
// repeated backward calls on the same tape.
class Tape {
  public:
    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    Value scalar(double v, bool requires_grad = false);
    Value vector(Vec v, bool requires_grad = false);
    Value vector(std::span<const double> v, bool requires_grad = false);
    Value matrix(const Mat& m, bool requires_grad = false);
    Value zeros(std::size_t n, bool requires_grad = false);

    // Populates grad on every ancestor of root that requires gradients.
    // root must be scalar.
    void backward(const Value& root);

    std::size_t size() const { return nodes_.size(); }
    void clear() { nodes_.clear(); }

  private:
    friend class OpBuilder;

    enum class Op : std::uint8_t {
        kLeaf,
        kAdd,
        kSub,
        kMul,      // elementwise, or scalar * vector
        kScale,    // c0 * x
        kAffine,   // c0 * x + c1
        kMatVec,
        kConcat,
        kTanh,
        kSigmoid,
        kExp,
        kLog,      // log(max(x, c0))
        kSoftmax,  // max-subtracted
        kDot,
        kNorm,
        kCosine,  // c0 = denominator epsilon
        kMean,
        kVariance,
        kMaxSelect,  // aux = argmax (ties -> lowest index)
        kSelect,     // aux = index
        kWeightedSum,  // many = [w, x_1, ..., x_n]
        kStack,        // many = scalar parents
        kReciprocal,
    };

    struct Node {
        Vec data;
        Vec grad;                // sized lazily during backward
        std::vector<int> many;   // extra parents (kStack, kWeightedSum)
        double c0 = 0.0;
        double c1 = 0.0;
        int a = -1;
        int b = -1;
        int aux = 0;
        std::uint32_t rows = 1;
        std::uint32_t cols = 1;
        Op op = Op::kLeaf;
        bool requires_grad = false;
    };

    Vec& grad_of(int id);
    void backstep(int id);
    int push(Node n);
    Value make(Node&& n) { return Value(this, push(std::move(n))); }

    std::vector<Node> nodes_;

    friend Tape::Node& node_at(Tape& t, int id);
    friend const Tape::Node& node_at(const Tape& t, int id);
};

// -- forward primitives ------------------------------------------------------
// Every primitive registers its backward rule; shape mismatches throw
// std::invalid_argument.

Value add(const Value& a, const Value& b);
Value sub(const Value& a, const Value& b);
// Elementwise product of same-size nodes, or scalar node times vector node.
Value mul(const Value& a, const Value& b);
Value scale(const Value& a, double c);
Value affine(const Value& a, double mul_c, double add_c);
Value matvec(const Value& m, const Value& v);
Value concat(const Value& a, const Value& b);
Value tanh(const Value& a);
Value sigmoid(const Value& a);
Value exp(const Value& a);
// Natural log with the argument floored at `floor_eps`.
Value log(const Value& a, double floor_eps = 1e-12);
Value softmax(const Value& a);
Value dot(const Value& a, const Value& b);
Value norm(const Value& a);
// cosine similarity a.b / ((|a|+eps)(|b|+eps)); eps == 0 requires nonzero norms.
Value cosine_sim(const Value& a, const Value& b, double eps = 0.0);
Value mean(const Value& a);
Value variance(const Value& a);  // population variance, 1/n
// Maximum entry of a vector; gradient flows only to the argmax
// (ties broken toward the lowest index).
Value max_index_select(const Value& a);
Value select(const Value& a, std::size_t index);
// sum_i w_i * x_i for vectors x_i of equal dimension; w has size n.
Value weighted_sum(const Value& w, std::span<const Value> xs);
// Pack scalar nodes into one vector node.
Value stack(std::span<const Value> scalars);
Value reciprocal(const Value& a);

}  // namespace sbniva::ad
