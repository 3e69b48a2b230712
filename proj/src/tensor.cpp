#include "mcrg/tensor.hpp"

#include "mcrg/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace mcrg::nn {

using detail::Node;

namespace {

void accumulate(Node& node, const Matrix& g) {
    if (!node.requires_grad) return;
    if (node.grad.size() == 0) {
        node.grad = g;
    } else {
        node.grad += g;
    }
}

// Builds the result node. The tape is only recorded when an input needs a
// gradient; `make_backward` receives the result node.
template <typename MakeBackward>
Tensor record(Matrix value, const std::vector<Tensor>& inputs, MakeBackward make_backward) {
    auto node = std::make_shared<Node>();
    node->value = std::move(value);
    for (const auto& t : inputs) {
        if (t.requires_grad()) node->requires_grad = true;
    }
    if (node->requires_grad) {
        for (const auto& t : inputs) node->parents.push_back(t.node());
        node->backward = make_backward(node.get());
    }
    return Tensor::from_node(std::move(node));
}

std::string shape_str(const Tensor& t) { return fmt::format("{}x{}", t.rows(), t.cols()); }

void require(bool ok, const char* op, const std::string& detail) {
    if (!ok) throw DimensionMismatch(fmt::format("{}: {}", op, detail));
}

void require_defined(const Tensor& t, const char* op) { require(t.defined(), op, "undefined tensor"); }

}  // namespace

Tensor Tensor::constant(Matrix value) {
    auto node = std::make_shared<Node>();
    node->value = std::move(value);
    return from_node(std::move(node));
}

Tensor Tensor::parameter(Matrix value) {
    auto node = std::make_shared<Node>();
    node->value = std::move(value);
    node->requires_grad = true;
    return from_node(std::move(node));
}

Tensor Tensor::zeros(Eigen::Index rows, Eigen::Index cols, bool requires_grad) {
    return requires_grad ? parameter(Matrix::Zero(rows, cols)) : constant(Matrix::Zero(rows, cols));
}

Tensor Tensor::from_node(std::shared_ptr<detail::Node> node) {
    Tensor t;
    t.node_ = std::move(node);
    return t;
}

void Tensor::zero_grad() {
    if (node_) node_->grad.resize(0, 0);
}

double Tensor::item() const {
    require(defined() && rows() == 1 && cols() == 1, "item", "expected a 1x1 tensor");
    return node_->value(0, 0);
}

void backward(const Tensor& loss) {
    if (!loss.defined() || loss.node()->parents.empty()) throw GraphDetached();
    require(loss.rows() == 1 && loss.cols() == 1, "backward", "loss must be 1x1, got " + shape_str(loss));

    // Iterative post-order DFS gives a topological order.
    std::vector<Node*> order;
    std::unordered_set<Node*> seen;
    std::vector<std::pair<Node*, std::size_t>> stack{{loss.node().get(), 0}};
    seen.insert(loss.node().get());
    while (!stack.empty()) {
        auto& [node, next] = stack.back();
        if (next < node->parents.size()) {
            Node* p = node->parents[next++].get();
            if (p->requires_grad && seen.insert(p).second) stack.emplace_back(p, 0);
        } else {
            order.push_back(node);
            stack.pop_back();
        }
    }
    for (Node* n : order) {
        if (!n->parents.empty()) n->grad.resize(0, 0);
    }
    loss.node()->grad = Matrix::Ones(1, 1);
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        Node* n = *it;
        if (n->backward && n->grad.size() > 0) n->backward(n->grad);
    }
}

Tensor matmul(const Tensor& a, const Tensor& b) {
    require_defined(a, "matmul");
    require_defined(b, "matmul");
    require(a.cols() == b.rows(), "matmul", shape_str(a) + " * " + shape_str(b));
    auto na = a.node();
    auto nb = b.node();
    return record(a.value() * b.value(), {a, b}, [na, nb](Node*) {
        return [na, nb](const Matrix& g) {
            if (na->requires_grad) accumulate(*na, g * nb->value.transpose());
            if (nb->requires_grad) accumulate(*nb, na->value.transpose() * g);
        };
    });
}

Tensor add(const Tensor& a, const Tensor& b) {
    require_defined(a, "add");
    require_defined(b, "add");
    require(a.rows() == b.rows() && a.cols() == b.cols(), "add", shape_str(a) + " + " + shape_str(b));
    auto na = a.node();
    auto nb = b.node();
    return record(a.value() + b.value(), {a, b}, [na, nb](Node*) {
        return [na, nb](const Matrix& g) {
            accumulate(*na, g);
            accumulate(*nb, g);
        };
    });
}

Tensor add_row(const Tensor& a, const Tensor& b) {
    require_defined(a, "add_row");
    require_defined(b, "add_row");
    require(b.rows() == 1 && a.cols() == b.cols(), "add_row", shape_str(a) + " + " + shape_str(b));
    auto na = a.node();
    auto nb = b.node();
    Matrix out = a.value().rowwise() + b.value().row(0);
    return record(std::move(out), {a, b}, [na, nb](Node*) {
        return [na, nb](const Matrix& g) {
            accumulate(*na, g);
            if (nb->requires_grad) accumulate(*nb, g.colwise().sum());
        };
    });
}

Tensor mul(const Tensor& a, const Tensor& b) {
    require_defined(a, "mul");
    require_defined(b, "mul");
    require(a.rows() == b.rows() && a.cols() == b.cols(), "mul", shape_str(a) + " .* " + shape_str(b));
    auto na = a.node();
    auto nb = b.node();
    return record(a.value().cwiseProduct(b.value()), {a, b}, [na, nb](Node*) {
        return [na, nb](const Matrix& g) {
            if (na->requires_grad) accumulate(*na, g.cwiseProduct(nb->value));
            if (nb->requires_grad) accumulate(*nb, g.cwiseProduct(na->value));
        };
    });
}

Tensor scale(const Tensor& a, double s) {
    require_defined(a, "scale");
    auto na = a.node();
    return record(a.value() * s, {a}, [na, s](Node*) { return [na, s](const Matrix& g) { accumulate(*na, g * s); }; });
}

Tensor relu(const Tensor& a) { return leaky_relu(a, 0.0); }

Tensor leaky_relu(const Tensor& a, double slope) {
    require_defined(a, "leaky_relu");
    auto na = a.node();
    Matrix out = a.value().unaryExpr([slope](double x) { return x > 0 ? x : slope * x; });
    return record(std::move(out), {a}, [na, slope](Node*) {
        return [na, slope](const Matrix& g) {
            Matrix d = na->value.unaryExpr([slope](double x) { return x > 0 ? 1.0 : slope; });
            accumulate(*na, g.cwiseProduct(d));
        };
    });
}

Tensor sigmoid(const Tensor& a) {
    require_defined(a, "sigmoid");
    auto na = a.node();
    Matrix out = a.value().unaryExpr([](double x) {
        if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
        double e = std::exp(x);
        return e / (1.0 + e);
    });
    return record(std::move(out), {a}, [na](Node* self) {
        return [na, self](const Matrix& g) {
            const Matrix& y = self->value;
            accumulate(*na, g.cwiseProduct(y.cwiseProduct((1.0 - y.array()).matrix())));
        };
    });
}

Tensor concat_cols(const std::vector<Tensor>& parts) {
    require(!parts.empty(), "concat_cols", "no inputs");
    Eigen::Index rows = parts[0].rows();
    Eigen::Index cols = 0;
    for (const auto& p : parts) {
        require_defined(p, "concat_cols");
        require(p.rows() == rows, "concat_cols", "row counts differ");
        cols += p.cols();
    }
    Matrix out(rows, cols);
    Eigen::Index c = 0;
    for (const auto& p : parts) {
        out.middleCols(c, p.cols()) = p.value();
        c += p.cols();
    }
    std::vector<std::shared_ptr<Node>> nodes;
    for (const auto& p : parts) nodes.push_back(p.node());
    return record(std::move(out), parts, [nodes](Node*) {
        return [nodes](const Matrix& g) {
            Eigen::Index c = 0;
            for (const auto& n : nodes) {
                if (n->requires_grad) accumulate(*n, g.middleCols(c, n->value.cols()));
                c += n->value.cols();
            }
        };
    });
}

Tensor slice_cols(const Tensor& a, Eigen::Index start, Eigen::Index count) {
    require_defined(a, "slice_cols");
    require(start >= 0 && count >= 0 && start + count <= a.cols(), "slice_cols",
            fmt::format("[{}, {}) out of {}", start, start + count, a.cols()));
    auto na = a.node();
    return record(Matrix(a.value().middleCols(start, count)), {a}, [na, start, count](Node*) {
        return [na, start, count](const Matrix& g) {
            Matrix full = Matrix::Zero(na->value.rows(), na->value.cols());
            full.middleCols(start, count) = g;
            accumulate(*na, full);
        };
    });
}

Tensor sum(const Tensor& a) {
    require_defined(a, "sum");
    auto na = a.node();
    Matrix out(1, 1);
    out(0, 0) = a.value().sum();
    return record(std::move(out), {a}, [na](Node*) {
        return [na](const Matrix& g) { accumulate(*na, Matrix::Constant(na->value.rows(), na->value.cols(), g(0, 0))); };
    });
}

Tensor dropout(const Tensor& a, double p, std::mt19937_64& rng, bool training) {
    require_defined(a, "dropout");
    if (!training || p <= 0.0) return a;
    require(p < 1.0, "dropout", "rate must be < 1");
    std::bernoulli_distribution keep(1.0 - p);
    Matrix mask(a.rows(), a.cols());
    for (Eigen::Index i = 0; i < mask.size(); ++i) mask.data()[i] = keep(rng) ? 1.0 / (1.0 - p) : 0.0;
    return mul(a, Tensor::constant(std::move(mask)));
}

Tensor gather_rows(const Tensor& table, const std::vector<int>& ids) {
    require_defined(table, "gather_rows");
    Matrix out = Matrix::Zero(static_cast<Eigen::Index>(ids.size()), table.cols());
    for (std::size_t i = 0; i < ids.size(); ++i) {
        require(ids[i] >= -1 && ids[i] < table.rows(), "gather_rows",
                fmt::format("row {} out of {}", ids[i], table.rows()));
        if (ids[i] >= 0) out.row(static_cast<Eigen::Index>(i)) = table.value().row(ids[i]);
    }
    auto nt = table.node();
    return record(std::move(out), {table}, [nt, ids](Node*) {
        return [nt, ids](const Matrix& g) {
            Matrix d = Matrix::Zero(nt->value.rows(), nt->value.cols());
            for (std::size_t i = 0; i < ids.size(); ++i) {
                if (ids[i] >= 0) d.row(ids[i]) += g.row(static_cast<Eigen::Index>(i));
            }
            accumulate(*nt, d);
        };
    });
}

Tensor segment_mean(const Tensor& table, const std::vector<std::vector<int>>& groups) {
    require_defined(table, "segment_mean");
    Matrix out = Matrix::Zero(static_cast<Eigen::Index>(groups.size()), table.cols());
    for (std::size_t gi = 0; gi < groups.size(); ++gi) {
        for (int id : groups[gi]) {
            require(id >= 0 && id < table.rows(), "segment_mean", fmt::format("row {} out of {}", id, table.rows()));
            out.row(static_cast<Eigen::Index>(gi)) += table.value().row(id);
        }
        if (!groups[gi].empty()) out.row(static_cast<Eigen::Index>(gi)) /= static_cast<double>(groups[gi].size());
    }
    auto nt = table.node();
    return record(std::move(out), {table}, [nt, groups](Node*) {
        return [nt, groups](const Matrix& g) {
            Matrix d = Matrix::Zero(nt->value.rows(), nt->value.cols());
            for (std::size_t gi = 0; gi < groups.size(); ++gi) {
                if (groups[gi].empty()) continue;
                const double w = 1.0 / static_cast<double>(groups[gi].size());
                for (int id : groups[gi]) d.row(id) += w * g.row(static_cast<Eigen::Index>(gi));
            }
            accumulate(*nt, d);
        };
    });
}

Tensor spmm(const SparseMatrix& a, const Tensor& x) {
    require_defined(x, "spmm");
    require(a.n == x.rows(), "spmm", fmt::format("{}x{} * {}", a.n, a.n, shape_str(x)));
    Matrix out = Matrix::Zero(x.rows(), x.cols());
    for (const auto& e : a.entries) {
        require(e.row >= 0 && e.row < a.n && e.col >= 0 && e.col < a.n, "spmm", "entry out of range");
        out.row(e.row) += e.weight * x.value().row(e.col);
    }
    auto nx = x.node();
    return record(std::move(out), {x}, [nx, a](Node*) {
        return [nx, a](const Matrix& g) {
            Matrix d = Matrix::Zero(nx->value.rows(), nx->value.cols());
            for (const auto& e : a.entries) d.row(e.col) += e.weight * g.row(e.row);
            accumulate(*nx, d);
        };
    });
}

namespace {

struct GatShape {
    int heads;
    Eigen::Index head_dim;
};

GatShape check_gat(const Matrix& z, const Matrix& a_dst, const Matrix& a_src,
                   const std::vector<std::vector<int>>& neighbors, int heads) {
    require(heads >= 1, "gat", "heads must be >= 1");
    require(z.cols() % heads == 0, "gat", fmt::format("{} columns not divisible by {} heads", z.cols(), heads));
    const Eigen::Index hd = z.cols() / heads;
    require(a_dst.rows() == heads && a_dst.cols() == hd && a_src.rows() == heads && a_src.cols() == hd, "gat",
            fmt::format("attention vectors must be {}x{}", heads, hd));
    require(static_cast<Eigen::Index>(neighbors.size()) == z.rows(), "gat", "one neighbor list per node");
    for (std::size_t i = 0; i < neighbors.size(); ++i) {
        bool self = false;
        for (int j : neighbors[i]) {
            require(j >= 0 && j < z.rows(), "gat", "neighbor out of range");
            self = self || j == static_cast<int>(i);
        }
        require(self, "gat", fmt::format("node {} is missing its self-loop", i));
    }
    return {heads, hd};
}

// scores[i][k] before the softmax, and alpha after, for one head.
void gat_head(const Matrix& z, const Matrix& a_dst, const Matrix& a_src, const std::vector<std::vector<int>>& nb,
              int h, Eigen::Index hd, double slope, std::vector<std::vector<double>>& s,
              std::vector<std::vector<double>>& alpha) {
    const Eigen::Index off = h * hd;
    const Eigen::Index n = z.rows();
    Eigen::VectorXd left(n);
    Eigen::VectorXd right(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        left(i) = z.row(i).segment(off, hd).dot(a_dst.row(h));
        right(i) = z.row(i).segment(off, hd).dot(a_src.row(h));
    }
    s.assign(n, {});
    alpha.assign(n, {});
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& js = nb[i];
        s[i].resize(js.size());
        alpha[i].resize(js.size());
        double mx = -INFINITY;
        for (std::size_t k = 0; k < js.size(); ++k) {
            s[i][k] = left(i) + right(js[k]);
            double e = s[i][k] > 0 ? s[i][k] : slope * s[i][k];
            alpha[i][k] = e;
            mx = std::max(mx, e);
        }
        double total = 0;
        for (double& a : alpha[i]) {
            a = std::exp(a - mx);
            total += a;
        }
        for (double& a : alpha[i]) a /= total;
    }
}

}  // namespace

std::vector<std::vector<std::vector<double>>> gat_coefficients(const Matrix& z, const Matrix& a_dst,
                                                               const Matrix& a_src,
                                                               const std::vector<std::vector<int>>& neighbors,
                                                               int heads, double leaky_slope) {
    auto shape = check_gat(z, a_dst, a_src, neighbors, heads);
    std::vector<std::vector<std::vector<double>>> out(heads);
    std::vector<std::vector<double>> s;
    for (int h = 0; h < heads; ++h) gat_head(z, a_dst, a_src, neighbors, h, shape.head_dim, leaky_slope, s, out[h]);
    return out;
}

Tensor gat_aggregate(const Tensor& z, const Tensor& a_dst, const Tensor& a_src,
                     const std::vector<std::vector<int>>& neighbors, int heads, double leaky_slope) {
    require_defined(z, "gat");
    require_defined(a_dst, "gat");
    require_defined(a_src, "gat");
    auto shape = check_gat(z.value(), a_dst.value(), a_src.value(), neighbors, heads);
    const Eigen::Index hd = shape.head_dim;
    const Eigen::Index n = z.rows();

    std::vector<std::vector<std::vector<double>>> scores(heads);
    std::vector<std::vector<std::vector<double>>> alphas(heads);
    Matrix out = Matrix::Zero(n, z.cols());
    for (int h = 0; h < heads; ++h) {
        gat_head(z.value(), a_dst.value(), a_src.value(), neighbors, h, hd, leaky_slope, scores[h], alphas[h]);
        for (Eigen::Index i = 0; i < n; ++i) {
            for (std::size_t k = 0; k < neighbors[i].size(); ++k) {
                out.row(i).segment(h * hd, hd) += alphas[h][i][k] * z.value().row(neighbors[i][k]).segment(h * hd, hd);
            }
        }
    }

    auto nz = z.node();
    auto nd = a_dst.node();
    auto ns = a_src.node();
    return record(std::move(out), {z, a_dst, a_src},
                  [nz, nd, ns, neighbors, heads, hd, leaky_slope, scores = std::move(scores),
                   alphas = std::move(alphas)](Node*) {
                      return [=](const Matrix& g) {
                          const Matrix& zv = nz->value;
                          Matrix dz = Matrix::Zero(zv.rows(), zv.cols());
                          Matrix dd = Matrix::Zero(heads, hd);
                          Matrix ds = Matrix::Zero(heads, hd);
                          for (int h = 0; h < heads; ++h) {
                              const Eigen::Index off = h * hd;
                              for (Eigen::Index i = 0; i < zv.rows(); ++i) {
                                  const auto& js = neighbors[i];
                                  const auto& a = alphas[h][i];
                                  auto gi = g.row(i).segment(off, hd);
                                  std::vector<double> dalpha(js.size());
                                  double weighted = 0;
                                  for (std::size_t k = 0; k < js.size(); ++k) {
                                      dz.row(js[k]).segment(off, hd) += a[k] * gi;
                                      dalpha[k] = gi.dot(zv.row(js[k]).segment(off, hd));
                                      weighted += a[k] * dalpha[k];
                                  }
                                  for (std::size_t k = 0; k < js.size(); ++k) {
                                      double de = a[k] * (dalpha[k] - weighted);
                                      double dsc = de * (scores[h][i][k] > 0 ? 1.0 : leaky_slope);
                                      dd.row(h) += dsc * zv.row(i).segment(off, hd);
                                      ds.row(h) += dsc * zv.row(js[k]).segment(off, hd);
                                      dz.row(i).segment(off, hd) += dsc * nd->value.row(h);
                                      dz.row(js[k]).segment(off, hd) += dsc * ns->value.row(h);
                                  }
                              }
                          }
                          accumulate(*nz, dz);
                          accumulate(*nd, dd);
                          accumulate(*ns, ds);
                      };
                  });
}

Tensor masked_cross_entropy(const Tensor& logits, const std::vector<int>& labels, const std::vector<bool>& mask,
                            const std::vector<double>& class_weights) {
    require_defined(logits, "masked_cross_entropy");
    const Eigen::Index n = logits.rows();
    const Eigen::Index c = logits.cols();
    require(static_cast<Eigen::Index>(labels.size()) == n && static_cast<Eigen::Index>(mask.size()) == n,
            "masked_cross_entropy", "labels and mask must have one entry per row");
    require(class_weights.empty() || static_cast<Eigen::Index>(class_weights.size()) == c, "masked_cross_entropy",
            "one class weight per column");

    Matrix probs(n, c);
    std::vector<double> w(n, 0.0);
    double total_w = 0;
    double loss = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        auto row = logits.value().row(i);
        const double mx = row.maxCoeff();
        const double lse = mx + std::log((row.array() - mx).exp().sum());
        probs.row(i) = (row.array() - lse).exp();
        if (!mask[i]) continue;
        require(labels[i] >= 0 && labels[i] < c, "masked_cross_entropy", fmt::format("label {} out of range", labels[i]));
        w[i] = class_weights.empty() ? 1.0 : class_weights[labels[i]];
        total_w += w[i];
        loss += w[i] * (lse - row(labels[i]));
    }
    if (total_w <= 0) throw EmptyMask();
    Matrix out(1, 1);
    out(0, 0) = loss / total_w;
    auto nl = logits.node();
    return record(std::move(out), {logits}, [nl, labels, probs = std::move(probs), w = std::move(w), total_w](Node*) {
        return [=](const Matrix& g) {
            Matrix d = Matrix::Zero(probs.rows(), probs.cols());
            for (Eigen::Index i = 0; i < probs.rows(); ++i) {
                if (w[i] == 0) continue;
                d.row(i) = probs.row(i) * (w[i] / total_w);
                d(i, labels[i]) -= w[i] / total_w;
            }
            accumulate(*nl, d * g(0, 0));
        };
    });
}

Tensor bce_loss(const Tensor& p, const Matrix& y) {
    require_defined(p, "bce_loss");
    require(p.rows() == y.rows() && p.cols() == y.cols() && y.size() > 0, "bce_loss", "shape of p and y differ");
    // Clamping keeps saturated sigmoids finite.
    constexpr double kEps = 1e-12;
    Matrix pc = p.value().cwiseMax(kEps).cwiseMin(1.0 - kEps);
    const double n = static_cast<double>(y.size());
    double loss = 0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        const double pi = pc.data()[i];
        const double yi = y.data()[i];
        loss -= yi * std::log(pi) + (1.0 - yi) * std::log(1.0 - pi);
    }
    Matrix out(1, 1);
    out(0, 0) = loss / n;
    auto np = p.node();
    return record(std::move(out), {p}, [np, pc = std::move(pc), y, n](Node*) {
        return [=](const Matrix& g) {
            Matrix d(pc.rows(), pc.cols());
            for (Eigen::Index i = 0; i < d.size(); ++i) {
                const double pi = pc.data()[i];
                d.data()[i] = (pi - y.data()[i]) / (pi * (1.0 - pi)) / n;
            }
            accumulate(*np, d * g(0, 0));
        };
    });
}

Tensor mse_loss(const Tensor& pred, const Matrix& target) {
    require_defined(pred, "mse_loss");
    require(pred.rows() == target.rows() && pred.cols() == target.cols() && target.size() > 0, "mse_loss",
            "shape of prediction and target differ");
    Matrix diff = pred.value() - target;
    const double n = static_cast<double>(target.size());
    Matrix out(1, 1);
    out(0, 0) = diff.squaredNorm() / n;
    auto np = pred.node();
    return record(std::move(out), {pred}, [np, diff = std::move(diff), n](Node*) {
        return [=](const Matrix& g) { accumulate(*np, diff * (2.0 * g(0, 0) / n)); };
    });
}

void adam_step(std::vector<Tensor>& params, AdamState& state, const AdamConfig& config) {
    if (state.m.size() != params.size()) {
        state.m.clear();
        state.v.clear();
        for (const auto& p : params) {
            state.m.push_back(Matrix::Zero(p.rows(), p.cols()));
            state.v.push_back(Matrix::Zero(p.rows(), p.cols()));
        }
    }
    ++state.step;
    const double c1 = 1.0 - std::pow(config.beta1, static_cast<double>(state.step));
    const double c2 = 1.0 - std::pow(config.beta2, static_cast<double>(state.step));
    for (std::size_t k = 0; k < params.size(); ++k) {
        Tensor& p = params[k];
        if (!p.has_grad()) continue;
        require(p.grad().rows() == state.m[k].rows() && p.grad().cols() == state.m[k].cols(), "adam_step",
                "parameter shape changed");
        Matrix g = p.grad();
        if (config.weight_decay != 0.0) g += config.weight_decay * p.value();
        state.m[k] = config.beta1 * state.m[k] + (1.0 - config.beta1) * g;
        state.v[k] = config.beta2 * state.v[k] + (1.0 - config.beta2) * g.cwiseProduct(g);
        Matrix& w = p.mutable_value();
        for (Eigen::Index i = 0; i < w.size(); ++i) {
            const double m_hat = state.m[k].data()[i] / c1;
            const double v_hat = state.v[k].data()[i] / c2;
            w.data()[i] -= config.lr * m_hat / (std::sqrt(v_hat) + config.eps);
        }
    }
}

Matrix glorot(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
    const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
    std::uniform_real_distribution<double> dist(-limit, limit);
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = dist(rng);
    return m;
}

}  // namespace mcrg::nn
