#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "screenwise/core/error.hpp"

namespace screenwise {

struct TrainingConfig {
    std::vector<int> hidden{32, 32};
    int epochs = 500;
    double learning_rate = 1e-3;
    int batch_size = 32;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

/// Fully connected network with ELU hidden activations and a linear output
/// layer, trained on mean squared error with Adam.
class Mlp {
public:
    Mlp(int inputs, const std::vector<int>& hidden, int outputs, std::mt19937_64& rng) {
        if (inputs < 1 || outputs < 1) throw Error(ErrorCode::InvalidValue, "network needs inputs and outputs");
        std::vector<int> sizes{inputs};
        for (int h : hidden) {
            if (h < 1) throw Error(ErrorCode::InvalidValue, "hidden layer width must be positive");
            sizes.push_back(h);
        }
        sizes.push_back(outputs);
        for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
            const double bound = std::sqrt(6.0 / (sizes[l] + sizes[l + 1]));
            std::uniform_real_distribution<double> u(-bound, bound);
            Layer layer;
            layer.w.resize(sizes[l + 1], sizes[l]);
            for (Eigen::Index i = 0; i < layer.w.size(); ++i) layer.w.data()[i] = u(rng);
            layer.b = Eigen::VectorXd::Zero(sizes[l + 1]);
            layers_.push_back(std::move(layer));
        }
    }

    /// Rows of `x` are observations.
    Eigen::MatrixXd predict(const Eigen::MatrixXd& x) const {
        Eigen::MatrixXd a = x.transpose();
        for (std::size_t l = 0; l < layers_.size(); ++l) {
            a = (layers_[l].w * a).colwise() + layers_[l].b;
            if (l + 1 < layers_.size()) a = a.unaryExpr(&elu);
        }
        return a.transpose();
    }

    /// Returns the per-epoch training loss. Throws on a non-finite loss.
    std::vector<double> train(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, const TrainingConfig& cfg,
                              std::mt19937_64& rng) {
        if (x.rows() != y.rows()) throw Error(ErrorCode::InvalidValue, "training inputs and targets differ in length");
        if (cfg.epochs < 1 || cfg.batch_size < 1 || !(cfg.learning_rate > 0.0))
            throw Error(ErrorCode::Config, "training needs positive epochs, batch size and learning rate");
        const Eigen::Index n = x.rows();
        std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
        std::iota(order.begin(), order.end(), Eigen::Index{0});

        std::vector<Moments> m(layers_.size()), v(layers_.size());
        for (std::size_t l = 0; l < layers_.size(); ++l) {
            m[l] = v[l] = Moments{Eigen::MatrixXd::Zero(layers_[l].w.rows(), layers_[l].w.cols()),
                                  Eigen::VectorXd::Zero(layers_[l].b.size())};
        }
        long step = 0;
        std::vector<double> losses;
        for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
            std::shuffle(order.begin(), order.end(), rng);
            double epoch_loss = 0.0;
            for (Eigen::Index start = 0; start < n; start += cfg.batch_size) {
                const Eigen::Index size = std::min<Eigen::Index>(cfg.batch_size, n - start);
                Eigen::MatrixXd xb(x.cols(), size), yb(y.cols(), size);
                for (Eigen::Index i = 0; i < size; ++i) {
                    xb.col(i) = x.row(order[static_cast<std::size_t>(start + i)]).transpose();
                    yb.col(i) = y.row(order[static_cast<std::size_t>(start + i)]).transpose();
                }
                epoch_loss += backprop_step(xb, yb, cfg, m, v, ++step) * static_cast<double>(size);
            }
            epoch_loss /= static_cast<double>(n);
            losses.push_back(epoch_loss);
            if (!std::isfinite(epoch_loss))
                throw ConvergenceError("network training diverged at epoch " + std::to_string(epoch + 1), {},
                                       epoch_loss, losses);
        }
        return losses;
    }

private:
    struct Layer {
        Eigen::MatrixXd w;
        Eigen::VectorXd b;
    };
    struct Moments {
        Eigen::MatrixXd w;
        Eigen::VectorXd b;
    };

    static double elu(double z) { return z > 0.0 ? z : std::expm1(z); }
    static double elu_grad(double z) { return z > 0.0 ? 1.0 : std::exp(z); }

    double backprop_step(const Eigen::MatrixXd& xb, const Eigen::MatrixXd& yb, const TrainingConfig& cfg,
                         std::vector<Moments>& m, std::vector<Moments>& v, long step) {
        const std::size_t depth = layers_.size();
        std::vector<Eigen::MatrixXd> pre(depth), act(depth + 1);
        act[0] = xb;
        for (std::size_t l = 0; l < depth; ++l) {
            pre[l] = (layers_[l].w * act[l]).colwise() + layers_[l].b;
            act[l + 1] = l + 1 < depth ? pre[l].unaryExpr(&elu) : pre[l];
        }
        const double count = static_cast<double>(yb.size());
        Eigen::MatrixXd delta = act[depth] - yb;
        const double loss = delta.squaredNorm() / count;
        delta *= 2.0 / count;

        const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step));
        const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step));
        for (std::size_t l = depth; l-- > 0;) {
            const Eigen::MatrixXd gw = delta * act[l].transpose();
            const Eigen::VectorXd gb = delta.rowwise().sum();
            if (l > 0) delta = (layers_[l].w.transpose() * delta).cwiseProduct(pre[l - 1].unaryExpr(&elu_grad));
            m[l].w = cfg.beta1 * m[l].w + (1.0 - cfg.beta1) * gw;
            m[l].b = cfg.beta1 * m[l].b + (1.0 - cfg.beta1) * gb;
            v[l].w = cfg.beta2 * v[l].w + (1.0 - cfg.beta2) * gw.cwiseAbs2();
            v[l].b = cfg.beta2 * v[l].b + (1.0 - cfg.beta2) * gb.cwiseAbs2();
            layers_[l].w.array() -=
                cfg.learning_rate * (m[l].w.array() / c1) / ((v[l].w.array() / c2).sqrt() + cfg.epsilon);
            layers_[l].b.array() -=
                cfg.learning_rate * (m[l].b.array() / c1) / ((v[l].b.array() / c2).sqrt() + cfg.epsilon);
        }
        return loss;
    }

    std::vector<Layer> layers_;
};

}  // namespace screenwise
