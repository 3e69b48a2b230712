#pragma once

// Rank-2 float64 tensors with reverse-mode gradients. Scalars are 1x1.

#include <Eigen/Dense>

#include <functional>
#include <memory>
#include <random>
#include <vector>

namespace mcrg::nn {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

namespace detail {
struct Node {
    Matrix value;
    Matrix grad;  // empty until something flows into it
    bool requires_grad = false;
    std::vector<std::shared_ptr<Node>> parents;
    // Receives d(loss)/d(value) and adds into the parents' grads.
    std::function<void(const Matrix&)> backward;
};
}  // namespace detail

class Tensor {
public:
    Tensor() = default;

    static Tensor constant(Matrix value);
    static Tensor parameter(Matrix value);
    static Tensor zeros(Eigen::Index rows, Eigen::Index cols, bool requires_grad = false);

    const Matrix& value() const { return node_->value; }
    // Writes bypass the tape; only use on leaves between steps.
    Matrix& mutable_value() { return node_->value; }
    const Matrix& grad() const { return node_->grad; }
    bool has_grad() const { return node_ && node_->grad.size() > 0; }
    bool requires_grad() const { return node_ && node_->requires_grad; }
    bool defined() const { return static_cast<bool>(node_); }
    void zero_grad();

    Eigen::Index rows() const { return node_->value.rows(); }
    Eigen::Index cols() const { return node_->value.cols(); }
    std::vector<int> shape() const { return {static_cast<int>(rows()), static_cast<int>(cols())}; }
    double item() const;

    const std::shared_ptr<detail::Node>& node() const { return node_; }
    static Tensor from_node(std::shared_ptr<detail::Node> node);

private:
    std::shared_ptr<detail::Node> node_;
};

// Reverse-mode accumulation into every requires_grad leaf reachable from
// `loss` (a 1x1 tensor). Throws GraphDetached when `loss` was not produced
// by a recorded operation and DimensionMismatch when it is not a scalar.
void backward(const Tensor& loss);

// ---------------------------------------------------------------------------
// Operations. All throw DimensionMismatch on incompatible shapes.

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor add(const Tensor& a, const Tensor& b);
// a (n x m) + b (1 x m) broadcast over rows.
Tensor add_row(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double s);
Tensor relu(const Tensor& a);
Tensor leaky_relu(const Tensor& a, double slope);
Tensor sigmoid(const Tensor& a);
Tensor concat_cols(const std::vector<Tensor>& parts);
Tensor slice_cols(const Tensor& a, Eigen::Index start, Eigen::Index count);
Tensor sum(const Tensor& a);

// Inverted dropout. Identity when !training or p == 0.
Tensor dropout(const Tensor& a, double p, std::mt19937_64& rng, bool training);

// out[i] = table[ids[i]]; an id of -1 yields a zero row that receives no
// gradient.
Tensor gather_rows(const Tensor& table, const std::vector<int>& ids);

// out[g] = mean of table rows in groups[g]; zero row for an empty group.
Tensor segment_mean(const Tensor& table, const std::vector<std::vector<int>>& groups);

// Sparse n x n matrix times dense x.
struct SparseMatrix {
    int n = 0;
    struct Entry {
        int row;
        int col;
        double weight;
    };
    std::vector<Entry> entries;
};
Tensor spmm(const SparseMatrix& a, const Tensor& x);

// Graph attention over `neighbors` (each list must contain the node
// itself). z is n x (heads * head_dim); a_dst and a_src are heads x
// head_dim. Per head: e_ij = LeakyReLU(a_dst.z_i + a_src.z_j), alpha =
// softmax over j, out_i = sum_j alpha_ij z_j.
Tensor gat_aggregate(const Tensor& z, const Tensor& a_dst, const Tensor& a_src,
                     const std::vector<std::vector<int>>& neighbors, int heads, double leaky_slope);
// The alpha rows of the above, [head][i][k] for neighbors[i][k].
std::vector<std::vector<std::vector<double>>> gat_coefficients(const Matrix& z, const Matrix& a_dst,
                                                               const Matrix& a_src,
                                                               const std::vector<std::vector<int>>& neighbors,
                                                               int heads, double leaky_slope);

// ---------------------------------------------------------------------------
// Losses (1x1 results).

// Weighted mean of -log softmax(logits[i])[labels[i]] over rows with
// mask[i]; weight of row i is class_weights[labels[i]] (all ones when
// empty). Throws EmptyMask when no row is selected.
Tensor masked_cross_entropy(const Tensor& logits, const std::vector<int>& labels, const std::vector<bool>& mask,
                            const std::vector<double>& class_weights = {});
// Mean binary cross-entropy of probabilities p against targets in [0, 1].
Tensor bce_loss(const Tensor& p, const Matrix& y);
Tensor mse_loss(const Tensor& pred, const Matrix& target);

// ---------------------------------------------------------------------------
// Optimization

struct AdamConfig {
    double lr = 0.01;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.0;  // L2 term added to the gradient
};

struct AdamState {
    std::vector<Matrix> m;
    std::vector<Matrix> v;
    long step = 0;
};

// One bias-corrected Adam update of every parameter that has a gradient.
// Parameters without a gradient are left untouched.
void adam_step(std::vector<Tensor>& params, AdamState& state, const AdamConfig& config);

// Glorot/Xavier uniform initialization.
Matrix glorot(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng);

}  // namespace mcrg::nn
