#include "sbniva/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sbniva::ad {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw std::invalid_argument("autodiff: " + msg); }

void require(bool cond, const char* msg) {
    if (!cond) fail(msg);
}

}  // namespace

Tape::Node& node_at(Tape& t, int id) { return t.nodes_[static_cast<std::size_t>(id)]; }
const Tape::Node& node_at(const Tape& t, int id) { return t.nodes_[static_cast<std::size_t>(id)]; }

const Vec& Value::data() const { return node_at(*tape_, id_).data; }
const Vec& Value::grad() const { return node_at(*tape_, id_).grad; }
double Value::scalar() const {
    const auto& d = node_at(*tape_, id_).data;
    require(d.size() == 1, "scalar() on a non-scalar node");
    return d[0];
}
std::size_t Value::size() const { return node_at(*tape_, id_).data.size(); }
std::size_t Value::rows() const { return node_at(*tape_, id_).rows; }
std::size_t Value::cols() const { return node_at(*tape_, id_).cols; }
bool Value::requires_grad() const { return node_at(*tape_, id_).requires_grad; }

int Tape::push(Node n) {
    nodes_.push_back(std::move(n));
    return static_cast<int>(nodes_.size()) - 1;
}

Value Tape::scalar(double v, bool requires_grad) {
    Node n;
    n.data = {v};
    n.requires_grad = requires_grad;
    return make(std::move(n));
}

Value Tape::vector(Vec v, bool requires_grad) {
    require(!v.empty(), "leaf vector must be non-empty");
    Node n;
    n.rows = static_cast<std::uint32_t>(v.size());
    n.data = std::move(v);
    n.requires_grad = requires_grad;
    return make(std::move(n));
}

Value Tape::vector(std::span<const double> v, bool requires_grad) {
    return vector(Vec(v.begin(), v.end()), requires_grad);
}

Value Tape::matrix(const Mat& m, bool requires_grad) {
    require(m.rows > 0 && m.cols > 0, "leaf matrix must be non-empty");
    Node n;
    n.rows = static_cast<std::uint32_t>(m.rows);
    n.cols = static_cast<std::uint32_t>(m.cols);
    n.data = m.data;
    n.requires_grad = requires_grad;
    return make(std::move(n));
}

Value Tape::zeros(std::size_t n, bool requires_grad) { return vector(Vec(n, 0.0), requires_grad); }

Vec& Tape::grad_of(int id) {
    Node& n = nodes_[static_cast<std::size_t>(id)];
    if (n.grad.empty()) n.grad.assign(n.data.size(), 0.0);
    return n.grad;
}

void Tape::backward(const Value& root) {
    require(root.valid() && root.tape() == this, "backward root must belong to this tape");
    require(root.size() == 1, "backward requires a scalar root");
    grad_of(root.id())[0] += 1.0;
    for (int i = root.id(); i >= 0; --i) {
        Node& n = nodes_[static_cast<std::size_t>(i)];
        if (n.op == Op::kLeaf || !n.requires_grad || n.grad.empty()) continue;
        backstep(i);
    }
}

void Tape::backstep(int id) {
    Node& n = nodes_[static_cast<std::size_t>(id)];
    const Vec& g = n.grad;
    const Vec& out = n.data;

    auto parent_wants = [&](int pid) { return nodes_[static_cast<std::size_t>(pid)].requires_grad; };
    auto pdata = [&](int pid) -> const Vec& { return nodes_[static_cast<std::size_t>(pid)].data; };

    switch (n.op) {
        case Op::kLeaf:
            break;
        case Op::kAdd: {
            if (parent_wants(n.a)) {
                Vec& ga = grad_of(n.a);
                for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
            }
            if (parent_wants(n.b)) {
                Vec& gb = grad_of(n.b);
                for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i];
            }
            break;
        }
        case Op::kSub: {
            if (parent_wants(n.a)) {
                Vec& ga = grad_of(n.a);
                for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
            }
            if (parent_wants(n.b)) {
                Vec& gb = grad_of(n.b);
                for (std::size_t i = 0; i < g.size(); ++i) gb[i] -= g[i];
            }
            break;
        }
        case Op::kMul: {
            const Vec& pa = pdata(n.a);
            const Vec& pb = pdata(n.b);
            if (pa.size() == pb.size()) {
                if (parent_wants(n.a)) {
                    Vec& ga = grad_of(n.a);
                    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * pb[i];
                }
                if (parent_wants(n.b)) {
                    Vec& gb = grad_of(n.b);
                    for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * pa[i];
                }
            } else if (pa.size() == 1) {
                if (parent_wants(n.a)) {
                    double acc = 0.0;
                    for (std::size_t i = 0; i < g.size(); ++i) acc += g[i] * pb[i];
                    grad_of(n.a)[0] += acc;
                }
                if (parent_wants(n.b)) {
                    Vec& gb = grad_of(n.b);
                    for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * pa[0];
                }
            } else {  // pb.size() == 1
                if (parent_wants(n.b)) {
                    double acc = 0.0;
                    for (std::size_t i = 0; i < g.size(); ++i) acc += g[i] * pa[i];
                    grad_of(n.b)[0] += acc;
                }
                if (parent_wants(n.a)) {
                    Vec& ga = grad_of(n.a);
                    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * pb[0];
                }
            }
            break;
        }
        case Op::kScale:
        case Op::kAffine: {
            if (parent_wants(n.a)) {
                Vec& ga = grad_of(n.a);
                for (std::size_t i = 0; i < g.size(); ++i) ga[i] += n.c0 * g[i];
            }
            break;
        }
        case Op::kMatVec: {
            const Node& m = nodes_[static_cast<std::size_t>(n.a)];
            const Vec& v = pdata(n.b);
            std::size_t rows = m.rows, cols = m.cols;
            if (parent_wants(n.a)) {
                Vec& gm = grad_of(n.a);
                for (std::size_t r = 0; r < rows; ++r) {
                    double gr = g[r];
                    if (gr == 0.0) continue;
                    for (std::size_t c = 0; c < cols; ++c) gm[r * cols + c] += gr * v[c];
                }
            }
            if (parent_wants(n.b)) {
                Vec& gv = grad_of(n.b);
                for (std::size_t r = 0; r < rows; ++r) {
                    double gr = g[r];
                    if (gr == 0.0) continue;
                    for (std::size_t c = 0; c < cols; ++c) gv[c] += gr * m.data[r * cols + c];
                }
            }
            break;
        }
        case Op::kConcat: {
            std::size_t na = pdata(n.a).size();
            if (parent_wants(n.a)) {
                Vec& ga = grad_of(n.a);
                for (std::size_t i = 0; i < na; ++i) ga[i] += g[i];
            }
            if (parent_wants(n.b)) {
                Vec& gb = grad_of(n.b);
                for (std::size_t i = 0; i < gb.size(); ++i) gb[i] += g[na + i];
            }
            break;
        }
        case Op::kTanh: {
            if (parent_wants(n.a)) {
                Vec& ga = grad_of(n.a);
                for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * (1.0 - out[i] * out[i]);
            }
            break;
        }
        case Op::kSigmoid: {
            if (parent_wants(n.a)) {
                Vec& ga = grad_of(n.a);
                for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * out[i] * (1.0 - out[i]);
            }
            break;
        }
        case Op::kExp: {
            if (parent_wants(n.a)) {
                Vec& ga = grad_of(n.a);
                for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * out[i];
            }
            break;
        }
        case Op::kLog: {
            if (parent_wants(n.a)) {
                const Vec& pa = pdata(n.a);
                Vec& ga = grad_of(n.a);
                for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] / std::max(pa[i], n.c0);
            }
            break;
        }
        case Op::kSoftmax: {
            if (parent_wants(n.a)) {
                double gy = 0.0;
                for (std::size_t i = 0; i < g.size(); ++i) gy += g[i] * out[i];
                Vec& ga = grad_of(n.a);
                for (std::size_t i = 0; i < g.size(); ++i) ga[i] += out[i] * (g[i] - gy);
            }
            break;
        }
        case Op::kDot: {
            const Vec& pa = pdata(n.a);
            const Vec& pb = pdata(n.b);
            if (parent_wants(n.a)) {
                Vec& ga = grad_of(n.a);
                for (std::size_t i = 0; i < pa.size(); ++i) ga[i] += g[0] * pb[i];
            }
            if (parent_wants(n.b)) {
                Vec& gb = grad_of(n.b);
                for (std::size_t i = 0; i < pb.size(); ++i) gb[i] += g[0] * pa[i];
            }
            break;
        }
        case Op::kNorm: {
            if (parent_wants(n.a)) {
                const Vec& pa = pdata(n.a);
                double denom = std::max(out[0], 1e-12);
                Vec& ga = grad_of(n.a);
                for (std::size_t i = 0; i < pa.size(); ++i) ga[i] += g[0] * pa[i] / denom;
            }
            break;
        }
        case Op::kCosine: {
            const Vec& pa = pdata(n.a);
            const Vec& pb = pdata(n.b);
            double na = 0.0, nb = 0.0;
            for (double v : pa) na += v * v;
            for (double v : pb) nb += v * v;
            na = std::sqrt(na);
            nb = std::sqrt(nb);
            double fa = na + n.c0, fb = nb + n.c0;
            double denom = fa * fb;
            double c = out[0];
            double na_safe = std::max(na, 1e-12), nb_safe = std::max(nb, 1e-12);
            if (parent_wants(n.a)) {
                Vec& ga = grad_of(n.a);
                for (std::size_t i = 0; i < pa.size(); ++i)
                    ga[i] += g[0] * (pb[i] / denom - c * pa[i] / (na_safe * fa));
            }
            if (parent_wants(n.b)) {
                Vec& gb = grad_of(n.b);
                for (std::size_t i = 0; i < pb.size(); ++i)
                    gb[i] += g[0] * (pa[i] / denom - c * pb[i] / (nb_safe * fb));
            }
            break;
        }
        case Op::kMean: {
            if (parent_wants(n.a)) {
                std::size_t sz = pdata(n.a).size();
                Vec& ga = grad_of(n.a);
                double gi = g[0] / static_cast<double>(sz);
                for (std::size_t i = 0; i < sz; ++i) ga[i] += gi;
            }
            break;
        }
        case Op::kVariance: {
            if (parent_wants(n.a)) {
                const Vec& pa = pdata(n.a);
                double nelem = static_cast<double>(pa.size());
                double m = 0.0;
                for (double v : pa) m += v;
                m /= nelem;
                Vec& ga = grad_of(n.a);
                for (std::size_t i = 0; i < pa.size(); ++i)
                    ga[i] += g[0] * 2.0 * (pa[i] - m) / nelem;
            }
            break;
        }
        case Op::kMaxSelect:
        case Op::kSelect: {
            if (parent_wants(n.a)) grad_of(n.a)[static_cast<std::size_t>(n.aux)] += g[0];
            break;
        }
        case Op::kWeightedSum: {
            int wid = n.many[0];
            const Vec& w = pdata(wid);
            if (parent_wants(wid)) {
                Vec& gw = grad_of(wid);
                for (std::size_t k = 0; k + 1 < n.many.size(); ++k) {
                    const Vec& xk = pdata(n.many[k + 1]);
                    double acc = 0.0;
                    for (std::size_t i = 0; i < g.size(); ++i) acc += g[i] * xk[i];
                    gw[k] += acc;
                }
            }
            for (std::size_t k = 0; k + 1 < n.many.size(); ++k) {
                int xid = n.many[k + 1];
                if (!parent_wants(xid)) continue;
                Vec& gx = grad_of(xid);
                for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * w[k];
            }
            break;
        }
        case Op::kStack: {
            for (std::size_t k = 0; k < n.many.size(); ++k) {
                int pid = n.many[k];
                if (parent_wants(pid)) grad_of(pid)[0] += g[k];
            }
            break;
        }
        case Op::kReciprocal: {
            if (parent_wants(n.a)) {
                Vec& ga = grad_of(n.a);
                for (std::size_t i = 0; i < g.size(); ++i) ga[i] -= g[i] * out[i] * out[i];
            }
            break;
        }
    }
}

// -- op construction ---------------------------------------------------------

namespace {

Tape& same_tape(const Value& a, const Value& b) {
    require(a.valid() && b.valid(), "operand is not bound to a tape");
    require(a.tape() == b.tape(), "operands belong to different tapes");
    return *a.tape();
}

Tape& one_tape(const Value& a) {
    require(a.valid(), "operand is not bound to a tape");
    return *a.tape();
}

}  // namespace

// Builder shim so free functions can reach Tape internals.
class OpBuilder {
  public:
    static Value build(Tape& t, Tape::Node&& n) {
        if (!n.requires_grad) {
            if (n.a >= 0 && node_at(t, n.a).requires_grad) n.requires_grad = true;
            if (n.b >= 0 && node_at(t, n.b).requires_grad) n.requires_grad = true;
            for (int pid : n.many)
                if (node_at(t, pid).requires_grad) n.requires_grad = true;
        }
        return t.make(std::move(n));
    }
    static Tape::Node fresh(Tape::Op op) {
        Tape::Node n;
        n.op = op;
        return n;
    }
    using Op = Tape::Op;
};

using Op = OpBuilder::Op;

Value add(const Value& a, const Value& b) {
    Tape& t = same_tape(a, b);
    require(a.size() == b.size(), "add: size mismatch");
    auto n = OpBuilder::fresh(Op::kAdd);
    n.a = a.id();
    n.b = b.id();
    n.rows = static_cast<std::uint32_t>(a.size());
    n.data.resize(a.size());
    const Vec& da = a.data();
    const Vec& db = b.data();
    for (std::size_t i = 0; i < da.size(); ++i) n.data[i] = da[i] + db[i];
    return OpBuilder::build(t, std::move(n));
}

Value sub(const Value& a, const Value& b) {
    Tape& t = same_tape(a, b);
    require(a.size() == b.size(), "sub: size mismatch");
    auto n = OpBuilder::fresh(Op::kSub);
    n.a = a.id();
    n.b = b.id();
    n.rows = static_cast<std::uint32_t>(a.size());
    n.data.resize(a.size());
    const Vec& da = a.data();
    const Vec& db = b.data();
    for (std::size_t i = 0; i < da.size(); ++i) n.data[i] = da[i] - db[i];
    return OpBuilder::build(t, std::move(n));
}

Value mul(const Value& a, const Value& b) {
    Tape& t = same_tape(a, b);
    require(a.size() == b.size() || a.size() == 1 || b.size() == 1,
            "mul: sizes must match or one operand must be scalar");
    auto n = OpBuilder::fresh(Op::kMul);
    n.a = a.id();
    n.b = b.id();
    const Vec& da = a.data();
    const Vec& db = b.data();
    std::size_t out_n = std::max(da.size(), db.size());
    n.rows = static_cast<std::uint32_t>(out_n);
    n.data.resize(out_n);
    if (da.size() == db.size()) {
        for (std::size_t i = 0; i < out_n; ++i) n.data[i] = da[i] * db[i];
    } else if (da.size() == 1) {
        for (std::size_t i = 0; i < out_n; ++i) n.data[i] = da[0] * db[i];
    } else {
        for (std::size_t i = 0; i < out_n; ++i) n.data[i] = da[i] * db[0];
    }
    return OpBuilder::build(t, std::move(n));
}

Value scale(const Value& a, double c) {
    Tape& t = one_tape(a);
    auto n = OpBuilder::fresh(Op::kScale);
    n.a = a.id();
    n.c0 = c;
    n.rows = static_cast<std::uint32_t>(a.size());
    n.data.resize(a.size());
    const Vec& da = a.data();
    for (std::size_t i = 0; i < da.size(); ++i) n.data[i] = c * da[i];
    return OpBuilder::build(t, std::move(n));
}

Value affine(const Value& a, double mul_c, double add_c) {
    Tape& t = one_tape(a);
    auto n = OpBuilder::fresh(Op::kAffine);
    n.a = a.id();
    n.c0 = mul_c;
    n.c1 = add_c;
    n.rows = static_cast<std::uint32_t>(a.size());
    n.data.resize(a.size());
    const Vec& da = a.data();
    for (std::size_t i = 0; i < da.size(); ++i) n.data[i] = mul_c * da[i] + add_c;
    return OpBuilder::build(t, std::move(n));
}

Value matvec(const Value& m, const Value& v) {
    Tape& t = same_tape(m, v);
    require(m.cols() == v.size() && v.cols() == 1, "matvec: shape mismatch");
    auto n = OpBuilder::fresh(Op::kMatVec);
    n.a = m.id();
    n.b = v.id();
    std::size_t rows = m.rows(), cols = m.cols();
    n.rows = static_cast<std::uint32_t>(rows);
    n.data.assign(rows, 0.0);
    const Vec& dm = m.data();
    const Vec& dv = v.data();
    for (std::size_t r = 0; r < rows; ++r) {
        double acc = 0.0;
        const double* row = dm.data() + r * cols;
        for (std::size_t c = 0; c < cols; ++c) acc += row[c] * dv[c];
        n.data[r] = acc;
    }
    return OpBuilder::build(t, std::move(n));
}

Value concat(const Value& a, const Value& b) {
    Tape& t = same_tape(a, b);
    auto n = OpBuilder::fresh(Op::kConcat);
    n.a = a.id();
    n.b = b.id();
    const Vec& da = a.data();
    const Vec& db = b.data();
    n.rows = static_cast<std::uint32_t>(da.size() + db.size());
    n.data.reserve(da.size() + db.size());
    n.data.insert(n.data.end(), da.begin(), da.end());
    n.data.insert(n.data.end(), db.begin(), db.end());
    return OpBuilder::build(t, std::move(n));
}

namespace {

template <class F>
Value unary_map(const Value& a, Op op, F f) {
    Tape& t = one_tape(a);
    auto n = OpBuilder::fresh(op);
    n.a = a.id();
    n.rows = static_cast<std::uint32_t>(a.size());
    n.data.resize(a.size());
    const Vec& da = a.data();
    for (std::size_t i = 0; i < da.size(); ++i) n.data[i] = f(da[i]);
    return OpBuilder::build(t, std::move(n));
}

}  // namespace

Value tanh(const Value& a) {
    return unary_map(a, Op::kTanh, [](double x) { return std::tanh(x); });
}

Value sigmoid(const Value& a) {
    return unary_map(a, Op::kSigmoid, [](double x) { return 1.0 / (1.0 + std::exp(-x)); });
}

Value exp(const Value& a) {
    return unary_map(a, Op::kExp, [](double x) { return std::exp(x); });
}

Value log(const Value& a, double floor_eps) {
    Tape& t = one_tape(a);
    auto n = OpBuilder::fresh(Op::kLog);
    n.a = a.id();
    n.c0 = floor_eps;
    n.rows = static_cast<std::uint32_t>(a.size());
    n.data.resize(a.size());
    const Vec& da = a.data();
    for (std::size_t i = 0; i < da.size(); ++i) n.data[i] = std::log(std::max(da[i], floor_eps));
    return OpBuilder::build(t, std::move(n));
}

Value softmax(const Value& a) {
    Tape& t = one_tape(a);
    require(a.size() >= 1, "softmax: empty input");
    auto n = OpBuilder::fresh(Op::kSoftmax);
    n.a = a.id();
    n.rows = static_cast<std::uint32_t>(a.size());
    n.data.resize(a.size());
    const Vec& da = a.data();
    double mx = da[0];
    for (double v : da) mx = std::max(mx, v);
    double z = 0.0;
    for (std::size_t i = 0; i < da.size(); ++i) {
        n.data[i] = std::exp(da[i] - mx);
        z += n.data[i];
    }
    for (double& v : n.data) v /= z;
    return OpBuilder::build(t, std::move(n));
}

Value dot(const Value& a, const Value& b) {
    Tape& t = same_tape(a, b);
    require(a.size() == b.size(), "dot: size mismatch");
    auto n = OpBuilder::fresh(Op::kDot);
    n.a = a.id();
    n.b = b.id();
    const Vec& da = a.data();
    const Vec& db = b.data();
    double acc = 0.0;
    for (std::size_t i = 0; i < da.size(); ++i) acc += da[i] * db[i];
    n.data = {acc};
    return OpBuilder::build(t, std::move(n));
}

Value norm(const Value& a) {
    Tape& t = one_tape(a);
    auto n = OpBuilder::fresh(Op::kNorm);
    n.a = a.id();
    double acc = 0.0;
    for (double v : a.data()) acc += v * v;
    n.data = {std::sqrt(acc)};
    return OpBuilder::build(t, std::move(n));
}

Value cosine_sim(const Value& a, const Value& b, double eps) {
    Tape& t = same_tape(a, b);
    require(a.size() == b.size(), "cosine_sim: size mismatch");
    double na = 0.0, nb = 0.0, d = 0.0;
    const Vec& da = a.data();
    const Vec& db = b.data();
    for (std::size_t i = 0; i < da.size(); ++i) {
        na += da[i] * da[i];
        nb += db[i] * db[i];
        d += da[i] * db[i];
    }
    na = std::sqrt(na);
    nb = std::sqrt(nb);
    if (eps == 0.0 && (na == 0.0 || nb == 0.0)) fail("cosine_sim: zero-norm argument");
    auto n = OpBuilder::fresh(Op::kCosine);
    n.a = a.id();
    n.b = b.id();
    n.c0 = eps;
    n.data = {d / ((na + eps) * (nb + eps))};
    return OpBuilder::build(t, std::move(n));
}

Value mean(const Value& a) {
    Tape& t = one_tape(a);
    require(a.size() >= 1, "mean: empty input");
    auto n = OpBuilder::fresh(Op::kMean);
    n.a = a.id();
    double acc = 0.0;
    for (double v : a.data()) acc += v;
    n.data = {acc / static_cast<double>(a.size())};
    return OpBuilder::build(t, std::move(n));
}

Value variance(const Value& a) {
    Tape& t = one_tape(a);
    require(a.size() >= 1, "variance: empty input");
    auto n = OpBuilder::fresh(Op::kVariance);
    n.a = a.id();
    const Vec& da = a.data();
    double m = 0.0;
    for (double v : da) m += v;
    m /= static_cast<double>(da.size());
    double acc = 0.0;
    for (double v : da) acc += (v - m) * (v - m);
    n.data = {acc / static_cast<double>(da.size())};
    return OpBuilder::build(t, std::move(n));
}

Value max_index_select(const Value& a) {
    Tape& t = one_tape(a);
    require(a.size() >= 1, "max_index_select: empty input");
    const Vec& da = a.data();
    std::size_t best = 0;
    for (std::size_t i = 1; i < da.size(); ++i)
        if (da[i] > da[best]) best = i;
    auto n = OpBuilder::fresh(Op::kMaxSelect);
    n.a = a.id();
    n.aux = static_cast<int>(best);
    n.data = {da[best]};
    return OpBuilder::build(t, std::move(n));
}

Value select(const Value& a, std::size_t index) {
    Tape& t = one_tape(a);
    require(index < a.size(), "select: index out of range");
    auto n = OpBuilder::fresh(Op::kSelect);
    n.a = a.id();
    n.aux = static_cast<int>(index);
    n.data = {a.data()[index]};
    return OpBuilder::build(t, std::move(n));
}

Value weighted_sum(const Value& w, std::span<const Value> xs) {
    Tape& t = one_tape(w);
    require(!xs.empty(), "weighted_sum: no vectors");
    require(w.size() == xs.size(), "weighted_sum: weight count mismatch");
    std::size_t dim = xs[0].size();
    auto n = OpBuilder::fresh(Op::kWeightedSum);
    n.many.reserve(xs.size() + 1);
    n.many.push_back(w.id());
    const Vec& dw = w.data();
    n.rows = static_cast<std::uint32_t>(dim);
    n.data.assign(dim, 0.0);
    for (std::size_t k = 0; k < xs.size(); ++k) {
        require(xs[k].valid() && xs[k].tape() == &t, "weighted_sum: tape mismatch");
        require(xs[k].size() == dim, "weighted_sum: vector dimension mismatch");
        n.many.push_back(xs[k].id());
        const Vec& xv = xs[k].data();
        for (std::size_t i = 0; i < dim; ++i) n.data[i] += dw[k] * xv[i];
    }
    return OpBuilder::build(t, std::move(n));
}

Value stack(std::span<const Value> scalars) {
    require(!scalars.empty(), "stack: empty input");
    Tape& t = one_tape(scalars[0]);
    auto n = OpBuilder::fresh(Op::kStack);
    n.rows = static_cast<std::uint32_t>(scalars.size());
    n.data.resize(scalars.size());
    n.many.reserve(scalars.size());
    for (std::size_t k = 0; k < scalars.size(); ++k) {
        require(scalars[k].valid() && scalars[k].tape() == &t, "stack: tape mismatch");
        require(scalars[k].size() == 1, "stack: non-scalar element");
        n.many.push_back(scalars[k].id());
        n.data[k] = scalars[k].data()[0];
    }
    return OpBuilder::build(t, std::move(n));
}

Value reciprocal(const Value& a) {
    return unary_map(a, Op::kReciprocal, [](double x) { return 1.0 / x; });
}

}  // namespace sbniva::ad
