#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace bhtomo {

enum class Activation { ReLU, Tanh };
enum class OptimizerKind { Adam, Sgd };

std::string to_string(Activation a);
std::string to_string(OptimizerKind o);
Activation activation_from_string(const std::string& s);
OptimizerKind optimizer_from_string(const std::string& s);

struct TrainingConfig {
    double learning_rate = 1e-5;
    int batch_size = 50;
    long n_steps = 2'100'000;
    std::uint64_t seed = 0;
    OptimizerKind optimizer = OptimizerKind::Adam;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_epsilon = 1e-8;
    // Learning rate decays linearly to final_lr_fraction * learning_rate.
    double final_lr_fraction = 1.0;
    long record_every = 2000;
    long eval_every = 10000;
    // When an evaluation set is given, restore the weights with the lowest
    // evaluation loss instead of the final-step weights.
    bool keep_best_eval = false;

    std::string digest() const;
};

// Fully connected regression network, hidden activations + linear output.
// Weight layout: weight(l) is (layer_sizes[l] x layer_sizes[l+1]), applied as
// row-vector times matrix; forward of a batch is one GEMM per layer.
class MlpModel {
public:
    MlpModel(std::vector<int> layer_sizes, Activation activation, std::uint64_t init_seed);
    MlpModel(std::vector<int> layer_sizes, Activation activation,
             std::vector<Eigen::MatrixXd> weights, std::vector<Eigen::VectorXd> biases);

    const std::vector<int>& layer_sizes() const { return layer_sizes_; }
    Activation activation() const { return activation_; }
    int input_dim() const { return layer_sizes_.front(); }
    std::size_t n_layers() const { return weights_.size(); }
    std::size_t n_parameters() const;

    Eigen::MatrixXd& weight(std::size_t l) { return weights_[l]; }
    const Eigen::MatrixXd& weight(std::size_t l) const { return weights_[l]; }
    Eigen::VectorXd& bias(std::size_t l) { return biases_[l]; }
    const Eigen::VectorXd& bias(std::size_t l) const { return biases_[l]; }

    double forward(const Eigen::Ref<const Eigen::VectorXd>& x) const;
    // rows = samples
    Eigen::VectorXd forward_batch(const Eigen::Ref<const Eigen::MatrixXd>& X) const;

private:
    std::vector<int> layer_sizes_;
    Activation activation_;
    std::vector<Eigen::MatrixXd> weights_;
    std::vector<Eigen::VectorXd> biases_;
};

struct Gradients {
    std::vector<Eigen::MatrixXd> weights;
    std::vector<Eigen::VectorXd> biases;
};

// Squared error scaled by the batch size: sum_batch |pred - label|^2 / N_batch.
double mse_loss(double pred, double label, int batch_size);
double batch_loss(const MlpModel& model, const Eigen::Ref<const Eigen::MatrixXd>& X,
                  const Eigen::Ref<const Eigen::VectorXd>& y);

// Exact gradients of batch_loss with respect to every weight and bias.
Gradients backward(const MlpModel& model, const Eigen::Ref<const Eigen::MatrixXd>& X,
                   const Eigen::Ref<const Eigen::VectorXd>& y);

struct TrainReport {
    std::vector<std::pair<long, double>> train_loss;
    std::vector<std::pair<long, double>> eval_loss;
    double final_train_loss = 0.0;
    double best_eval_loss = 0.0;
    long best_eval_step = -1;
};

// Minibatch gradient descent with the configured optimizer; single-threaded
// and bit-reproducible for a fixed seed. Diverging loss raises NumericError.
TrainReport train(MlpModel& model, const Eigen::Ref<const Eigen::MatrixXd>& X,
                  const Eigen::Ref<const Eigen::VectorXd>& y, const TrainingConfig& cfg,
                  const Eigen::MatrixXd* X_eval = nullptr,
                  const Eigen::VectorXd* y_eval = nullptr);

}  // namespace bhtomo
