// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <functional>
#include <unordered_map>
#include <vector>

namespace ankf::neural {

using Mat = Eigen::MatrixXd;

// Define-by-run reverse-mode tape over dense double matrices. One tape per
// forward pass; nodes are created in topological order and walked backward.
// Parameter leaves reference external storage, so building a tape never
// copies weights.
class Tape {
public:
    using Id = int;

    Id constant(Mat value);
    Id leaf(const Mat* external);

    Id add(Id a, Id b);
    Id sub(Id a, Id b);
    Id hadamard(Id a, Id b);
    Id scale(Id a, double s);
    Id add_scalar(Id a, double s);
    Id matmul(Id a, Id b);
    Id matmul_nt(Id a, Id b);  // A * B^T
    Id add_rowvec(Id x, Id bias);
    Id sigmoid(Id a);
    Id tanh_(Id a);
    Id log_(Id a);
    Id softmax_rows(Id a);
    Id vstack(const std::vector<Id>& rows);
    Id row(Id a, int r);
    Id cols(Id a, int c0, int n);
    Id concat_cols(Id a, Id b);
    Id reshape(Id a, int rows, int cols);
    Id sum_all(Id a);
    Id mean_all(Id a);
    Id s_mul(Id a, Id b);
    Id s_div(Id a, Id b);
    Id s_sqrt(Id a);

    const Mat& val(Id id) const;
    const Mat& grad(Id id) const;

    // Seeds d(loss)/d(loss) = 1 and accumulates into every reachable node.
    void backward(Id loss);

    // Gradient of a parameter leaf after backward; nullptr if untouched.
    const Mat* leaf_grad(const Mat* external) const;

    size_t size() const { return nodes_.size(); }

private:
    struct Node {
        Mat value;
        const Mat* external = nullptr;
        Mat grad;
        bool grad_ready = false;
        std::function<void()> back;
    };

    Id push(Mat value, std::function<void()> back);
    Mat& grad_buf(Id id);
    void check_finite(Id id) const;

    std::vector<Node> nodes_;
    std::unordered_map<const Mat*, Id> leaf_ids_;
};

}  // namespace ankf::neural
