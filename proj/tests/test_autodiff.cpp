#include <doctest.h>

#include <cmath>
#include <functional>

#include "sbniva/autodiff.hpp"
#include "support/testutil.hpp"

using namespace sbniva;
using testutil::grad_close;
using testutil::random_vec;

namespace {

using Builder = std::function<ad::Value(ad::Tape&, std::vector<ad::Value>&)>;

// Backward pass vs central finite differences over every input coordinate.
void check_gradients(std::vector<Vec> inputs, const Builder& build, double h = 1e-5) {
    ad::Tape tape;
    std::vector<ad::Value> leaves;
    for (const auto& v : inputs) leaves.push_back(tape.vector(v, true));
    ad::Value root = build(tape, leaves);
    REQUIRE(root.size() == 1);
    tape.backward(root);

    auto eval = [&](const std::vector<Vec>& xs) {
        ad::Tape t2;
        std::vector<ad::Value> ls;
        for (const auto& v : xs) ls.push_back(t2.vector(v));
        return build(t2, ls).scalar();
    };

    for (std::size_t i = 0; i < inputs.size(); ++i) {
        const Vec& g = leaves[i].grad();
        REQUIRE(g.size() == inputs[i].size());
        for (std::size_t k = 0; k < inputs[i].size(); ++k) {
            double fd = testutil::central_diff(
                &inputs[i][k], [&] { return eval(inputs); }, h);
            INFO("input ", i, " coord ", k, " analytic ", g[k], " fd ", fd);
            CHECK(grad_close(g[k], fd));
        }
    }
}

}  // namespace

TEST_SUITE_BEGIN("autodiff");

TEST_CASE("forward values of basic primitives") {
    ad::Tape t;
    CHECK(ad::sigmoid(t.scalar(0.0)).scalar() == doctest::Approx(0.5).epsilon(1e-12));

    auto sm = ad::softmax(t.vector(Vec{2.5, 2.5, 2.5, 2.5}));
    for (double v : sm.data()) CHECK(v == doctest::Approx(0.25).epsilon(1e-12));

    Vec v{0.3, -1.2, 2.0};
    CHECK(ad::cosine_sim(t.vector(v), t.vector(v)).scalar() ==
          doctest::Approx(1.0).epsilon(1e-12));

    CHECK(ad::tanh(t.scalar(0.0)).scalar() == 0.0);
    CHECK(ad::exp(t.scalar(1.0)).scalar() == doctest::Approx(M_E).epsilon(1e-12));
    CHECK(ad::norm(t.vector(Vec{3.0, 4.0})).scalar() == doctest::Approx(5.0).epsilon(1e-12));
    CHECK(ad::mean(t.vector(Vec{1.0, 2.0, 3.0})).scalar() == doctest::Approx(2.0));
    CHECK(ad::variance(t.vector(Vec{1.0, 2.0, 3.0})).scalar() ==
          doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(ad::max_index_select(t.vector(Vec{0.1, 0.9, 0.3})).scalar() == 0.9);
    CHECK(ad::reciprocal(t.scalar(4.0)).scalar() == 0.25);
}

TEST_CASE("product rule and sigmoid derivative") {
    {
        ad::Tape t;
        auto x = t.scalar(2.0, true);
        auto y = t.scalar(3.0, true);
        auto z = ad::mul(x, y);
        t.backward(z);
        CHECK(x.grad()[0] == doctest::Approx(3.0));
        CHECK(y.grad()[0] == doctest::Approx(2.0));
    }
    {
        ad::Tape t;
        auto x = t.scalar(0.0, true);
        auto s = ad::sigmoid(x);
        t.backward(s);
        CHECK(x.grad()[0] == doctest::Approx(0.25).epsilon(1e-12));
    }
}

TEST_CASE("random small graph matches finite differences") {
    // A five-op graph mixing the core primitives.
    Rng rng(17);
    check_gradients({random_vec(rng, 4), random_vec(rng, 4)},
                    [](ad::Tape&, std::vector<ad::Value>& in) {
                        auto a = ad::tanh(in[0]);
                        auto b = ad::sigmoid(in[1]);
                        auto c = ad::mul(a, b);
                        auto d = ad::softmax(c);
                        return ad::dot(d, in[0]);
                    });
}

TEST_CASE("every primitive matches finite differences") {
    Rng rng(99);
    for (int round = 0; round < 3; ++round) {
        check_gradients({random_vec(rng, 5), random_vec(rng, 5)},
                        [](ad::Tape&, std::vector<ad::Value>& in) {
                            return ad::dot(ad::add(in[0], in[1]), ad::sub(in[0], in[1]));
                        });
        check_gradients({random_vec(rng, 4), random_vec(rng, 4)},
                        [](ad::Tape&, std::vector<ad::Value>& in) {
                            return ad::mean(ad::mul(in[0], in[1]));
                        });
        // scalar * vector broadcasting
        check_gradients({random_vec(rng, 1), random_vec(rng, 6)},
                        [](ad::Tape&, std::vector<ad::Value>& in) {
                            return ad::mean(ad::mul(in[0], in[1]));
                        });
        check_gradients({random_vec(rng, 6)}, [](ad::Tape&, std::vector<ad::Value>& in) {
            return ad::mean(ad::affine(ad::scale(in[0], 1.7), -0.5, 0.25));
        });
        check_gradients({random_vec(rng, 3), random_vec(rng, 2)},
                        [](ad::Tape&, std::vector<ad::Value>& in) {
                            return ad::norm(ad::concat(in[0], in[1]));
                        });
        check_gradients({random_vec(rng, 5)}, [](ad::Tape&, std::vector<ad::Value>& in) {
            return ad::dot(ad::tanh(in[0]), ad::sigmoid(in[0]));
        });
        check_gradients({random_vec(rng, 4, -1.0, 1.0)},
                        [](ad::Tape&, std::vector<ad::Value>& in) {
                            return ad::mean(ad::exp(in[0]));
                        });
        check_gradients({random_vec(rng, 4, 0.2, 3.0)},
                        [](ad::Tape&, std::vector<ad::Value>& in) {
                            return ad::mean(ad::log(in[0]));
                        });
        check_gradients({random_vec(rng, 5), random_vec(rng, 5)},
                        [](ad::Tape&, std::vector<ad::Value>& in) {
                            return ad::dot(ad::softmax(in[0]), in[1]);
                        });
        check_gradients({random_vec(rng, 6)}, [](ad::Tape&, std::vector<ad::Value>& in) {
            return ad::norm(in[0]);
        });
        check_gradients({random_vec(rng, 5), random_vec(rng, 5)},
                        [](ad::Tape&, std::vector<ad::Value>& in) {
                            return ad::cosine_sim(in[0], in[1]);
                        });
        check_gradients({random_vec(rng, 5), random_vec(rng, 5)},
                        [](ad::Tape&, std::vector<ad::Value>& in) {
                            return ad::cosine_sim(in[0], in[1], 1e-8);
                        });
        check_gradients({random_vec(rng, 7)}, [](ad::Tape&, std::vector<ad::Value>& in) {
            return ad::variance(in[0]);
        });
        check_gradients({random_vec(rng, 5)}, [](ad::Tape&, std::vector<ad::Value>& in) {
            return ad::max_index_select(in[0]);
        });
        check_gradients({random_vec(rng, 5)}, [](ad::Tape&, std::vector<ad::Value>& in) {
            return ad::select(in[0], 2);
        });
        check_gradients({random_vec(rng, 3), random_vec(rng, 4), random_vec(rng, 4),
                         random_vec(rng, 4)},
                        [](ad::Tape&, std::vector<ad::Value>& in) {
                            std::vector<ad::Value> xs{in[1], in[2], in[3]};
                            return ad::mean(ad::weighted_sum(in[0], xs));
                        });
        check_gradients({random_vec(rng, 1), random_vec(rng, 1), random_vec(rng, 1)},
                        [](ad::Tape&, std::vector<ad::Value>& in) {
                            std::vector<ad::Value> ss{in[0], in[1], in[2]};
                            return ad::variance(ad::stack(ss));
                        });
        check_gradients({random_vec(rng, 4, 0.5, 2.0)},
                        [](ad::Tape&, std::vector<ad::Value>& in) {
                            return ad::mean(ad::reciprocal(in[0]));
                        });
    }
}

TEST_CASE("matvec gradients for both the matrix and the vector") {
    Rng rng(3);
    Mat m = testutil::random_mat(rng, 3, 4);
    Vec v = random_vec(rng, 4);
    auto eval = [&] {
        ad::Tape t;
        return ad::mean(ad::matvec(t.matrix(m), t.vector(v))).scalar();
    };

    ad::Tape t;
    auto ml = t.matrix(m, true);
    auto vl = t.vector(v, true);
    t.backward(ad::mean(ad::matvec(ml, vl)));
    for (std::size_t i = 0; i < m.data.size(); ++i) {
        double fd = testutil::central_diff(&m.data[i], eval);
        CHECK(grad_close(ml.grad()[i], fd));
    }
    for (std::size_t i = 0; i < v.size(); ++i) {
        double fd = testutil::central_diff(&v[i], eval);
        CHECK(grad_close(vl.grad()[i], fd));
    }
}

TEST_CASE("softmax outputs sum to 1 and stay positive") {
    Rng rng(5);
    for (int i = 0; i < 200; ++i) {
        ad::Tape t;
        auto n = static_cast<std::size_t>(uniform_int(rng, 1, 9));
        auto out = ad::softmax(t.vector(random_vec(rng, n, -30.0, 30.0)));
        double sum = 0.0;
        for (double v : out.data()) {
            CHECK(v > 0.0);
            sum += v;
        }
        CHECK(std::abs(sum - 1.0) < 1e-9);
    }
}

TEST_CASE("max gradient routes to the lowest tied index") {
    ad::Tape t;
    auto v = t.vector(Vec{1.0, 3.0, 3.0}, true);
    auto m = ad::max_index_select(v);
    CHECK(m.scalar() == 3.0);
    t.backward(m);
    CHECK(v.grad() == Vec{0.0, 1.0, 0.0});
}

TEST_CASE("gradient accumulates through shared subexpressions") {
    ad::Tape t;
    auto x = t.scalar(1.5, true);
    auto y = ad::add(ad::mul(x, x), x);  // x^2 + x -> dy/dx = 2x + 1
    t.backward(y);
    CHECK(x.grad()[0] == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("errors: shape mismatch, zero-norm cosine, non-scalar backward") {
    ad::Tape t;
    auto a = t.vector(Vec{1.0, 2.0});
    auto b = t.vector(Vec{1.0, 2.0, 3.0});
    CHECK_THROWS_AS(ad::add(a, b), std::invalid_argument);
    CHECK_THROWS_AS(ad::dot(a, b), std::invalid_argument);

    auto zero = t.vector(Vec{0.0, 0.0});
    CHECK_THROWS_AS(ad::cosine_sim(a, zero), std::invalid_argument);
    CHECK_NOTHROW(ad::cosine_sim(a, zero, 1e-8));

    CHECK_THROWS_AS(t.backward(a), std::invalid_argument);

    Mat m(2, 3, 1.0);
    CHECK_THROWS_AS(ad::matvec(t.matrix(m), a), std::invalid_argument);
}

TEST_CASE("values on different tapes cannot be combined") {
    ad::Tape t1, t2;
    auto a = t1.scalar(1.0);
    auto b = t2.scalar(2.0);
    CHECK_THROWS_AS(ad::add(a, b), std::invalid_argument);
}

TEST_SUITE_END();
