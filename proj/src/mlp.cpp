#include "bhtomo/mlp.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "bhtomo/errors.hpp"
#include "bhtomo/hashing.hpp"
#include "bhtomo/rng.hpp"

namespace bhtomo {

std::string to_string(Activation a) {
    return a == Activation::ReLU ? "relu" : "tanh";
}

std::string to_string(OptimizerKind o) {
    return o == OptimizerKind::Adam ? "adam" : "sgd";
}

Activation activation_from_string(const std::string& s) {
    if (s == "relu") return Activation::ReLU;
    if (s == "tanh") return Activation::Tanh;
    throw ConfigError("mlp: unknown activation '" + s + "'");
}

OptimizerKind optimizer_from_string(const std::string& s) {
    if (s == "adam") return OptimizerKind::Adam;
    if (s == "sgd") return OptimizerKind::Sgd;
    throw ConfigError("mlp: unknown optimizer '" + s + "'");
}

std::string TrainingConfig::digest() const {
    std::ostringstream os;
    os.precision(17);
    os << "lr=" << learning_rate << ";batch=" << batch_size << ";steps=" << n_steps
       << ";seed=" << seed << ";opt=" << to_string(optimizer) << ";b1=" << adam_beta1
       << ";b2=" << adam_beta2 << ";eps=" << adam_epsilon << ";flr=" << final_lr_fraction
       << ";best=" << (keep_best_eval ? 1 : 0);
    return fnv1a64_hex(os.str());
}

MlpModel::MlpModel(std::vector<int> layer_sizes, Activation activation, std::uint64_t init_seed)
    : layer_sizes_(std::move(layer_sizes)), activation_(activation) {
    if (layer_sizes_.size() < 2) throw ConfigError("mlp: need at least input and output layers");
    SplitMix64 rng(init_seed);
    for (std::size_t l = 0; l + 1 < layer_sizes_.size(); ++l) {
        int fan_in = layer_sizes_[l];
        int fan_out = layer_sizes_[l + 1];
        if (fan_in < 1 || fan_out < 1) throw ConfigError("mlp: layer sizes must be positive");
        // He-uniform fan-in scaling
        double limit = std::sqrt(6.0 / static_cast<double>(fan_in));
        Eigen::MatrixXd W(fan_in, fan_out);
        for (Eigen::Index r = 0; r < W.rows(); ++r) {
            for (Eigen::Index c = 0; c < W.cols(); ++c) {
                W(r, c) = rng.uniform(-limit, limit);
            }
        }
        weights_.push_back(std::move(W));
        biases_.push_back(Eigen::VectorXd::Zero(fan_out));
    }
}

MlpModel::MlpModel(std::vector<int> layer_sizes, Activation activation,
                   std::vector<Eigen::MatrixXd> weights, std::vector<Eigen::VectorXd> biases)
    : layer_sizes_(std::move(layer_sizes)),
      activation_(activation),
      weights_(std::move(weights)),
      biases_(std::move(biases)) {
    if (layer_sizes_.size() < 2 || weights_.size() != layer_sizes_.size() - 1 ||
        biases_.size() != weights_.size()) {
        throw ConfigError("mlp: inconsistent layer structure");
    }
    for (std::size_t l = 0; l < weights_.size(); ++l) {
        if (weights_[l].rows() != layer_sizes_[l] || weights_[l].cols() != layer_sizes_[l + 1] ||
            biases_[l].size() != layer_sizes_[l + 1]) {
            throw ConfigError("mlp: weight shape mismatch at layer " + std::to_string(l));
        }
    }
}

std::size_t MlpModel::n_parameters() const {
    std::size_t n = 0;
    for (std::size_t l = 0; l < weights_.size(); ++l) {
        n += static_cast<std::size_t>(weights_[l].size()) +
             static_cast<std::size_t>(biases_[l].size());
    }
    return n;
}

namespace {

inline void apply_activation(Eigen::MatrixXd& z, Activation act) {
    if (act == Activation::ReLU) {
        z = z.cwiseMax(0.0);
    } else {
        z = z.array().tanh().matrix();
    }
}

// Derivative in terms of the activation output.
inline Eigen::ArrayXXd activation_grad(const Eigen::MatrixXd& a, Activation act) {
    if (act == Activation::ReLU) {
        return (a.array() > 0.0).cast<double>();
    }
    return 1.0 - a.array().square();
}

struct ForwardPass {
    std::vector<Eigen::MatrixXd> activations;  // activations[0] = input, size n_layers+1
};

void run_forward(const MlpModel& model, const Eigen::Ref<const Eigen::MatrixXd>& X,
                 ForwardPass& fp) {
    const std::size_t L = model.n_layers();
    fp.activations.resize(L + 1);
    fp.activations[0] = X;
    for (std::size_t l = 0; l < L; ++l) {
        Eigen::MatrixXd& z = fp.activations[l + 1];
        z.noalias() = fp.activations[l] * model.weight(l);
        z.rowwise() += model.bias(l).transpose();
        if (l + 1 < L) apply_activation(z, model.activation());
    }
}

}  // namespace

double MlpModel::forward(const Eigen::Ref<const Eigen::VectorXd>& x) const {
    if (x.size() != input_dim()) {
        throw ConfigError("mlp: input has dimension " + std::to_string(x.size()) + ", expected " +
                          std::to_string(input_dim()));
    }
    Eigen::MatrixXd row = x.transpose();
    return forward_batch(row)(0);
}

Eigen::VectorXd MlpModel::forward_batch(const Eigen::Ref<const Eigen::MatrixXd>& X) const {
    if (X.cols() != input_dim()) {
        throw ConfigError("mlp: batch has " + std::to_string(X.cols()) + " columns, expected " +
                          std::to_string(input_dim()));
    }
    ForwardPass fp;
    run_forward(*this, X, fp);
    return fp.activations.back().col(0);
}

double mse_loss(double pred, double label, int batch_size) {
    if (batch_size < 1) throw ConfigError("mlp: batch_size must be >= 1");
    double d = pred - label;
    return d * d / static_cast<double>(batch_size);
}

double batch_loss(const MlpModel& model, const Eigen::Ref<const Eigen::MatrixXd>& X,
                  const Eigen::Ref<const Eigen::VectorXd>& y) {
    Eigen::VectorXd pred = model.forward_batch(X);
    return (pred - y).squaredNorm() / static_cast<double>(X.rows());
}

Gradients backward(const MlpModel& model, const Eigen::Ref<const Eigen::MatrixXd>& X,
                   const Eigen::Ref<const Eigen::VectorXd>& y) {
    if (X.rows() == 0) throw ConfigError("mlp: empty batch");
    if (X.rows() != y.size()) throw ConfigError("mlp: batch/label size mismatch");
    const std::size_t L = model.n_layers();

    ForwardPass fp;
    run_forward(model, X, fp);

    Gradients g;
    g.weights.resize(L);
    g.biases.resize(L);

    // d loss / d output, loss = sum (pred - y)^2 / batch
    Eigen::MatrixXd delta =
        2.0 / static_cast<double>(X.rows()) * (fp.activations[L].col(0) - y);
    for (std::size_t l = L; l-- > 0;) {
        g.weights[l].noalias() = fp.activations[l].transpose() * delta;
        g.biases[l] = delta.colwise().sum().transpose();
        if (l > 0) {
            Eigen::MatrixXd back;
            back.noalias() = delta * model.weight(l).transpose();
            delta = back.array() * activation_grad(fp.activations[l], model.activation());
        }
    }
    return g;
}

TrainReport train(MlpModel& model, const Eigen::Ref<const Eigen::MatrixXd>& X,
                  const Eigen::Ref<const Eigen::VectorXd>& y, const TrainingConfig& cfg,
                  const Eigen::MatrixXd* X_eval, const Eigen::VectorXd* y_eval) {
    const Eigen::Index n = X.rows();
    if (n == 0) throw ConfigError("mlp: empty training set");
    if (X.rows() != y.size()) throw ConfigError("mlp: dataset/label size mismatch");
    if (!y.allFinite()) throw ConfigError("mlp: labels contain non-finite values");
    if (cfg.batch_size < 1) throw ConfigError("mlp: batch_size must be >= 1");
    if (cfg.learning_rate < 0) throw ConfigError("mlp: learning_rate must be >= 0");
    if ((X_eval == nullptr) != (y_eval == nullptr)) {
        throw ConfigError("mlp: evaluation features and labels must be given together");
    }

    const std::size_t L = model.n_layers();
    SplitMix64 rng(cfg.seed);

    std::vector<Eigen::MatrixXd> mW(L), vW(L);
    std::vector<Eigen::VectorXd> mb(L), vb(L);
    if (cfg.optimizer == OptimizerKind::Adam) {
        for (std::size_t l = 0; l < L; ++l) {
            mW[l] = Eigen::MatrixXd::Zero(model.weight(l).rows(), model.weight(l).cols());
            vW[l] = mW[l];
            mb[l] = Eigen::VectorXd::Zero(model.bias(l).size());
            vb[l] = mb[l];
        }
    }

    Eigen::MatrixXd batch_X(cfg.batch_size, model.input_dim());
    Eigen::VectorXd batch_y(cfg.batch_size);

    TrainReport report;
    std::vector<Eigen::MatrixXd> best_weights;
    std::vector<Eigen::VectorXd> best_biases;
    report.best_eval_loss = std::numeric_limits<double>::infinity();

    ForwardPass fp;
    Gradients g;
    g.weights.resize(L);
    g.biases.resize(L);

    for (long step = 0; step < cfg.n_steps; ++step) {
        for (int i = 0; i < cfg.batch_size; ++i) {
            auto idx = static_cast<Eigen::Index>(rng.uniform_below(static_cast<std::uint64_t>(n)));
            batch_X.row(i) = X.row(idx);
            batch_y(i) = y(idx);
        }

        run_forward(model, batch_X, fp);
        double loss = (fp.activations[L].col(0) - batch_y).squaredNorm() /
                      static_cast<double>(cfg.batch_size);
        if (!std::isfinite(loss)) {
            throw NumericError("mlp: training diverged at step " + std::to_string(step) +
                               " (loss not finite); lr=" + std::to_string(cfg.learning_rate));
        }

        Eigen::MatrixXd delta =
            2.0 / static_cast<double>(cfg.batch_size) * (fp.activations[L].col(0) - batch_y);
        for (std::size_t l = L; l-- > 0;) {
            g.weights[l].noalias() = fp.activations[l].transpose() * delta;
            g.biases[l] = delta.colwise().sum().transpose();
            if (l > 0) {
                Eigen::MatrixXd back;
                back.noalias() = delta * model.weight(l).transpose();
                delta = back.array() * activation_grad(fp.activations[l], model.activation());
            }
        }

        double frac = cfg.n_steps > 1 ? static_cast<double>(step) /
                                            static_cast<double>(cfg.n_steps - 1)
                                      : 0.0;
        double lr = cfg.learning_rate * (1.0 - (1.0 - cfg.final_lr_fraction) * frac);

        if (cfg.optimizer == OptimizerKind::Adam) {
            double t = static_cast<double>(step + 1);
            double bc1 = 1.0 - std::pow(cfg.adam_beta1, t);
            double bc2 = 1.0 - std::pow(cfg.adam_beta2, t);
            for (std::size_t l = 0; l < L; ++l) {
                mW[l] = cfg.adam_beta1 * mW[l] + (1.0 - cfg.adam_beta1) * g.weights[l];
                vW[l].array() = cfg.adam_beta2 * vW[l].array() +
                                (1.0 - cfg.adam_beta2) * g.weights[l].array().square();
                model.weight(l).array() -=
                    lr * (mW[l].array() / bc1) /
                    ((vW[l].array() / bc2).sqrt() + cfg.adam_epsilon);
                mb[l] = cfg.adam_beta1 * mb[l] + (1.0 - cfg.adam_beta1) * g.biases[l];
                vb[l].array() = cfg.adam_beta2 * vb[l].array() +
                                (1.0 - cfg.adam_beta2) * g.biases[l].array().square();
                model.bias(l).array() -=
                    lr * (mb[l].array() / bc1) /
                    ((vb[l].array() / bc2).sqrt() + cfg.adam_epsilon);
            }
        } else {
            for (std::size_t l = 0; l < L; ++l) {
                model.weight(l) -= lr * g.weights[l];
                model.bias(l) -= lr * g.biases[l];
            }
        }

        if (cfg.record_every > 0 && (step % cfg.record_every == 0 || step + 1 == cfg.n_steps)) {
            report.train_loss.emplace_back(step, loss);
            report.final_train_loss = loss;
        }
        if (X_eval != nullptr && cfg.eval_every > 0 &&
            (step % cfg.eval_every == 0 || step + 1 == cfg.n_steps)) {
            double el = batch_loss(model, *X_eval, *y_eval);
            report.eval_loss.emplace_back(step, el);
            if (el < report.best_eval_loss) {
                report.best_eval_loss = el;
                report.best_eval_step = step;
                if (cfg.keep_best_eval) {
                    best_weights.clear();
                    best_biases.clear();
                    for (std::size_t l = 0; l < L; ++l) {
                        best_weights.push_back(model.weight(l));
                        best_biases.push_back(model.bias(l));
                    }
                }
            }
        }
    }

    if (cfg.keep_best_eval && !best_weights.empty()) {
        for (std::size_t l = 0; l < L; ++l) {
            model.weight(l) = best_weights[l];
            model.bias(l) = best_biases[l];
        }
    }
    return report;
}

}  // namespace bhtomo
