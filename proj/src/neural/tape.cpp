// SPDX-License-Identifier: Apache-2.0
#include "ankf/neural/tape.hpp"

#include <cmath>

#include "ankf/errors.hpp"

namespace ankf::neural {

Tape::Id Tape::push(Mat value, std::function<void()> back) {
    Node n;
    n.value = std::move(value);
    n.back = std::move(back);
    nodes_.push_back(std::move(n));
    const Id id = static_cast<Id>(nodes_.size()) - 1;
    check_finite(id);
    return id;
}

void Tape::check_finite(Id id) const {
    if (!val(id).allFinite()) {
        throw NumericalError("tape: op produced a non-finite value");
    }
}

const Mat& Tape::val(Id id) const {
    const Node& n = nodes_[static_cast<size_t>(id)];
    return n.external ? *n.external : n.value;
}

const Mat& Tape::grad(Id id) const { return nodes_[static_cast<size_t>(id)].grad; }

Mat& Tape::grad_buf(Id id) {
    Node& n = nodes_[static_cast<size_t>(id)];
    if (!n.grad_ready) {
        n.grad = Mat::Zero(val(id).rows(), val(id).cols());
        n.grad_ready = true;
    }
    return n.grad;
}

Tape::Id Tape::constant(Mat value) { return push(std::move(value), nullptr); }

Tape::Id Tape::leaf(const Mat* external) {
    if (auto it = leaf_ids_.find(external); it != leaf_ids_.end()) return it->second;
    Node n;
    n.external = external;
    nodes_.push_back(std::move(n));
    const Id id = static_cast<Id>(nodes_.size()) - 1;
    leaf_ids_.emplace(external, id);
    check_finite(id);
    return id;
}

const Mat* Tape::leaf_grad(const Mat* external) const {
    const auto it = leaf_ids_.find(external);
    if (it == leaf_ids_.end()) return nullptr;
    const Node& n = nodes_[static_cast<size_t>(it->second)];
    return n.grad_ready ? &n.grad : nullptr;
}

Tape::Id Tape::add(Id a, Id b) {
    Id out = push(val(a) + val(b), nullptr);
    nodes_.back().back = [this, a, b, out] {
        grad_buf(a) += grad(out);
        grad_buf(b) += grad(out);
    };
    return out;
}

Tape::Id Tape::sub(Id a, Id b) {
    Id out = push(val(a) - val(b), nullptr);
    nodes_.back().back = [this, a, b, out] {
        grad_buf(a) += grad(out);
        grad_buf(b) -= grad(out);
    };
    return out;
}

Tape::Id Tape::hadamard(Id a, Id b) {
    Id out = push(val(a).cwiseProduct(val(b)), nullptr);
    nodes_.back().back = [this, a, b, out] {
        grad_buf(a) += grad(out).cwiseProduct(val(b));
        grad_buf(b) += grad(out).cwiseProduct(val(a));
    };
    return out;
}

Tape::Id Tape::scale(Id a, double s) {
    Id out = push(val(a) * s, nullptr);
    nodes_.back().back = [this, a, s, out] { grad_buf(a) += grad(out) * s; };
    return out;
}

Tape::Id Tape::add_scalar(Id a, double s) {
    Id out = push(val(a).array() + s, nullptr);
    nodes_.back().back = [this, a, out] { grad_buf(a) += grad(out); };
    return out;
}

Tape::Id Tape::matmul(Id a, Id b) {
    Id out = push(val(a) * val(b), nullptr);
    nodes_.back().back = [this, a, b, out] {
        grad_buf(a).noalias() += grad(out) * val(b).transpose();
        grad_buf(b).noalias() += val(a).transpose() * grad(out);
    };
    return out;
}

Tape::Id Tape::matmul_nt(Id a, Id b) {
    Id out = push(val(a) * val(b).transpose(), nullptr);
    nodes_.back().back = [this, a, b, out] {
        grad_buf(a).noalias() += grad(out) * val(b);
        grad_buf(b).noalias() += grad(out).transpose() * val(a);
    };
    return out;
}

Tape::Id Tape::add_rowvec(Id x, Id bias) {
    Mat v = val(x);
    v.rowwise() += val(bias).row(0);
    Id out = push(std::move(v), nullptr);
    nodes_.back().back = [this, x, bias, out] {
        grad_buf(x) += grad(out);
        grad_buf(bias) += grad(out).colwise().sum();
    };
    return out;
}

Tape::Id Tape::sigmoid(Id a) {
    Mat v = (1.0 / (1.0 + (-val(a)).array().exp())).matrix();
    Id out = push(std::move(v), nullptr);
    nodes_.back().back = [this, a, out] {
        const auto& s = val(out).array();
        grad_buf(a).array() += grad(out).array() * s * (1.0 - s);
    };
    return out;
}

Tape::Id Tape::tanh_(Id a) {
    Mat v = (1.0 - 2.0 / ((2.0 * val(a).array()).exp() + 1.0)).matrix();
    Id out = push(std::move(v), nullptr);
    nodes_.back().back = [this, a, out] {
        const auto& t = val(out).array();
        grad_buf(a).array() += grad(out).array() * (1.0 - t * t);
    };
    return out;
}

Tape::Id Tape::log_(Id a) {
    Id out = push(val(a).array().log().matrix(), nullptr);
    nodes_.back().back = [this, a, out] {
        grad_buf(a).array() += grad(out).array() / val(a).array();
    };
    return out;
}

Tape::Id Tape::softmax_rows(Id a) {
    Mat v = val(a);
    for (int r = 0; r < v.rows(); ++r) {
        const double mx = v.row(r).maxCoeff();
        v.row(r) = (v.row(r).array() - mx).exp();
        v.row(r) /= v.row(r).sum();
    }
    Id out = push(std::move(v), nullptr);
    nodes_.back().back = [this, a, out] {
        const Mat& s = val(out);
        const Mat& g = grad(out);
        Mat& ga = grad_buf(a);
        for (int r = 0; r < s.rows(); ++r) {
            const double dot = g.row(r).dot(s.row(r));
            ga.row(r).array() += s.row(r).array() * (g.row(r).array() - dot);
        }
    };
    return out;
}

Tape::Id Tape::vstack(const std::vector<Id>& rows) {
    if (rows.empty()) throw NumericalError("vstack: empty input");
    const int c = static_cast<int>(val(rows[0]).cols());
    Mat v(static_cast<int>(rows.size()), c);
    for (size_t i = 0; i < rows.size(); ++i) v.row(static_cast<int>(i)) = val(rows[i]).row(0);
    Id out = push(std::move(v), nullptr);
    nodes_.back().back = [this, rows, out] {
        for (size_t i = 0; i < rows.size(); ++i) {
            grad_buf(rows[i]) += grad(out).row(static_cast<int>(i));
        }
    };
    return out;
}

Tape::Id Tape::row(Id a, int r) {
    Id out = push(val(a).row(r), nullptr);
    nodes_.back().back = [this, a, r, out] { grad_buf(a).row(r) += grad(out).row(0); };
    return out;
}

Tape::Id Tape::cols(Id a, int c0, int n) {
    Id out = push(val(a).middleCols(c0, n), nullptr);
    nodes_.back().back = [this, a, c0, n, out] {
        grad_buf(a).middleCols(c0, n) += grad(out);
    };
    return out;
}

Tape::Id Tape::concat_cols(Id a, Id b) {
    Mat v(val(a).rows(), val(a).cols() + val(b).cols());
    v << val(a), val(b);
    Id out = push(std::move(v), nullptr);
    nodes_.back().back = [this, a, b, out] {
        grad_buf(a) += grad(out).leftCols(val(a).cols());
        grad_buf(b) += grad(out).rightCols(val(b).cols());
    };
    return out;
}

Tape::Id Tape::reshape(Id a, int rows, int cols) {
    Mat v = val(a);
    v.resize(rows, cols);
    Id out = push(std::move(v), nullptr);
    nodes_.back().back = [this, a, out] {
        Mat g = grad(out);
        g.resize(val(a).rows(), val(a).cols());
        grad_buf(a) += g;
    };
    return out;
}

Tape::Id Tape::sum_all(Id a) {
    Mat v(1, 1);
    v(0, 0) = val(a).sum();
    Id out = push(std::move(v), nullptr);
    nodes_.back().back = [this, a, out] {
        grad_buf(a).array() += grad(out)(0, 0);
    };
    return out;
}

Tape::Id Tape::mean_all(Id a) {
    const double n = static_cast<double>(val(a).size());
    Mat v(1, 1);
    v(0, 0) = val(a).sum() / n;
    Id out = push(std::move(v), nullptr);
    nodes_.back().back = [this, a, n, out] {
        grad_buf(a).array() += grad(out)(0, 0) / n;
    };
    return out;
}

Tape::Id Tape::s_mul(Id a, Id b) {
    Mat v(1, 1);
    v(0, 0) = val(a)(0, 0) * val(b)(0, 0);
    Id out = push(std::move(v), nullptr);
    nodes_.back().back = [this, a, b, out] {
        grad_buf(a)(0, 0) += grad(out)(0, 0) * val(b)(0, 0);
        grad_buf(b)(0, 0) += grad(out)(0, 0) * val(a)(0, 0);
    };
    return out;
}

Tape::Id Tape::s_div(Id a, Id b) {
    Mat v(1, 1);
    v(0, 0) = val(a)(0, 0) / val(b)(0, 0);
    Id out = push(std::move(v), nullptr);
    nodes_.back().back = [this, a, b, out] {
        const double bv = val(b)(0, 0);
        grad_buf(a)(0, 0) += grad(out)(0, 0) / bv;
        grad_buf(b)(0, 0) -= grad(out)(0, 0) * val(a)(0, 0) / (bv * bv);
    };
    return out;
}

Tape::Id Tape::s_sqrt(Id a) {
    Mat v(1, 1);
    v(0, 0) = std::sqrt(val(a)(0, 0));
    Id out = push(std::move(v), nullptr);
    nodes_.back().back = [this, a, out] {
        grad_buf(a)(0, 0) += grad(out)(0, 0) * 0.5 / val(out)(0, 0);
    };
    return out;
}

void Tape::backward(Id loss) {
    if (val(loss).size() != 1) throw NumericalError("backward: loss must be scalar");
    grad_buf(loss)(0, 0) = 1.0;
    for (Id id = loss; id >= 0; --id) {
        Node& n = nodes_[static_cast<size_t>(id)];
        if (n.back && n.grad_ready) n.back();
    }
}

}  // namespace ankf::neural
