#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace cep {

struct MlpParams {
    int hidden = 150;
    int max_epochs = 10;
    int batch_size = 32;
    double step_size = 1e-3;
    int early_stopping_patience = 2;
    double validation_fraction = 0.1;
    std::uint64_t seed = 0;
};

// Single-hidden-layer ReLU network with a sigmoid output. Inputs are
// standardized with training-fold statistics stored inside the model.
struct MlpModel {
    MlpParams params;
    int input_dim = 0;
    std::vector<double> w1;  // hidden x input, row-major
    std::vector<double> b1;  // hidden
    std::vector<double> w2;  // hidden
    double b2 = 0.0;
    std::vector<double> feature_mean;
    std::vector<double> feature_scale;  // 1 where the training column was constant
    std::vector<std::string> feature_names;
    int epochs_run = 0;

    bool trained() const { return input_dim > 0; }
    double predict_proba(std::span<const double> row) const;

    std::string to_json() const;
    static MlpModel from_json(const std::string& text);
};

MlpModel mlp_train(const std::vector<std::vector<double>>& X, const std::vector<int>& y,
                   const MlpParams& params, std::vector<std::string> feature_names = {});

// Parameter packing and the batch loss/gradient, exposed so tests can
// check the analytic gradient against central finite differences.
std::vector<double> mlp_pack_params(const MlpModel& m);
void mlp_unpack_params(MlpModel& m, const std::vector<double>& packed);
double mlp_loss_and_gradient(const MlpModel& m, const std::vector<std::vector<double>>& X,
                             const std::vector<int>& y, std::vector<double>* gradient);

}  // namespace cep
