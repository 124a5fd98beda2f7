#include "cep/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <json.hpp>

#include "cep/errors.hpp"
#include "cep/gbt.hpp"  // sigmoid
#include "cep/rng.hpp"

namespace cep {

namespace {

using nlohmann::json;

std::vector<double> standardize_row(const MlpModel& m, std::span<const double> row) {
    std::vector<double> z(row.size());
    for (std::size_t i = 0; i < row.size(); ++i)
        z[i] = (row[i] - m.feature_mean[i]) / m.feature_scale[i];
    return z;
}

// Forward pass on a standardized row; fills hidden activations.
double forward(const MlpModel& m, const std::vector<double>& z, std::vector<double>& hidden) {
    const int h = m.params.hidden;
    const int d = m.input_dim;
    hidden.assign(h, 0.0);
    for (int j = 0; j < h; ++j) {
        double acc = m.b1[j];
        const double* wrow = &m.w1[static_cast<std::size_t>(j) * d];
        for (int i = 0; i < d; ++i) acc += wrow[i] * z[i];
        hidden[j] = acc > 0.0 ? acc : 0.0;  // ReLU
    }
    double out = m.b2;
    for (int j = 0; j < h; ++j) out += m.w2[j] * hidden[j];
    return out;  // logit
}

double safe_log(double v) { return std::log(std::max(v, 1e-15)); }

}  // namespace

double MlpModel::predict_proba(std::span<const double> row) const {
    if (!trained()) throw StateError("model has not been trained");
    if (static_cast<int>(row.size()) != input_dim)
        throw ValidationError("feature row length does not match model width");
    std::vector<double> hidden;
    const std::vector<double> z = standardize_row(*this, row);
    return sigmoid(forward(*this, z, hidden));
}

std::vector<double> mlp_pack_params(const MlpModel& m) {
    std::vector<double> packed;
    packed.reserve(m.w1.size() + m.b1.size() + m.w2.size() + 1);
    packed.insert(packed.end(), m.w1.begin(), m.w1.end());
    packed.insert(packed.end(), m.b1.begin(), m.b1.end());
    packed.insert(packed.end(), m.w2.begin(), m.w2.end());
    packed.push_back(m.b2);
    return packed;
}

void mlp_unpack_params(MlpModel& m, const std::vector<double>& packed) {
    std::size_t off = 0;
    std::copy_n(packed.begin() + off, m.w1.size(), m.w1.begin());
    off += m.w1.size();
    std::copy_n(packed.begin() + off, m.b1.size(), m.b1.begin());
    off += m.b1.size();
    std::copy_n(packed.begin() + off, m.w2.size(), m.w2.begin());
    off += m.w2.size();
    m.b2 = packed[off];
}

double mlp_loss_and_gradient(const MlpModel& m, const std::vector<std::vector<double>>& X,
                             const std::vector<int>& y, std::vector<double>* gradient) {
    const int d = m.input_dim;
    const int h = m.params.hidden;
    const std::size_t n = X.size();

    std::vector<double> g_w1(m.w1.size(), 0.0), g_b1(h, 0.0), g_w2(h, 0.0);
    double g_b2 = 0.0;
    double loss = 0.0;

    std::vector<double> hidden;
    for (std::size_t r = 0; r < n; ++r) {
        const std::vector<double> z = standardize_row(m, X[r]);
        const double logit = forward(m, z, hidden);
        const double p = sigmoid(logit);
        loss += y[r] ? -safe_log(p) : -safe_log(1.0 - p);

        const double dz2 = p - static_cast<double>(y[r]);  // dLoss/dlogit
        g_b2 += dz2;
        for (int j = 0; j < h; ++j) {
            g_w2[j] += dz2 * hidden[j];
            if (hidden[j] > 0.0) {
                const double dz1 = dz2 * m.w2[j];
                g_b1[j] += dz1;
                double* grow = &g_w1[static_cast<std::size_t>(j) * d];
                for (int i = 0; i < d; ++i) grow[i] += dz1 * z[i];
            }
        }
    }

    const double inv_n = 1.0 / static_cast<double>(n);
    loss *= inv_n;
    if (gradient) {
        gradient->clear();
        gradient->reserve(g_w1.size() + g_b1.size() + g_w2.size() + 1);
        for (double v : g_w1) gradient->push_back(v * inv_n);
        for (double v : g_b1) gradient->push_back(v * inv_n);
        for (double v : g_w2) gradient->push_back(v * inv_n);
        gradient->push_back(g_b2 * inv_n);
    }
    return loss;
}

MlpModel mlp_train(const std::vector<std::vector<double>>& X, const std::vector<int>& y,
                   const MlpParams& params, std::vector<std::string> feature_names) {
    const std::size_t n = X.size();
    if (n < 2 || y.size() != n) throw ValidationError("training requires at least two rows");
    const std::size_t d = X[0].size();
    if (d == 0) throw ValidationError("training requires at least one feature");
    if (params.max_epochs < 1) throw ValidationError("epoch budget must be at least 1");
    if (params.hidden < 1 || params.batch_size < 1 || params.step_size <= 0.0)
        throw ValidationError("invalid mlp parameters");
    long long positives = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (X[i].size() != d) throw ValidationError("ragged feature matrix");
        for (double v : X[i]) {
            if (!std::isfinite(v)) throw ValidationError("non-finite feature value");
        }
        if (y[i] != 0 && y[i] != 1) throw ValidationError("labels must be 0 or 1");
        positives += y[i];
    }
    if (positives == 0 || positives == static_cast<long long>(n))
        throw ValidationError("training requires both classes to be present");

    MlpModel m;
    m.params = params;
    m.input_dim = static_cast<int>(d);
    if (feature_names.empty()) {
        for (std::size_t f = 0; f < d; ++f) feature_names.push_back("f" + std::to_string(f));
    } else if (feature_names.size() != d) {
        throw ValidationError("feature name count does not match matrix width");
    }
    m.feature_names = std::move(feature_names);

    // training-fold standardization; constant columns keep scale 1
    m.feature_mean.assign(d, 0.0);
    m.feature_scale.assign(d, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t f = 0; f < d; ++f) m.feature_mean[f] += X[i][f];
    }
    for (double& v : m.feature_mean) v /= static_cast<double>(n);
    for (std::size_t f = 0; f < d; ++f) {
        double sq = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double c = X[i][f] - m.feature_mean[f];
            sq += c * c;
        }
        const double sd = std::sqrt(sq / static_cast<double>(n));
        if (sd > 1e-12) m.feature_scale[f] = sd;
    }

    Rng rng(params.seed);
    const int h = params.hidden;
    m.w1.resize(static_cast<std::size_t>(h) * d);
    m.b1.assign(h, 0.0);
    m.w2.resize(h);
    const double limit1 = std::sqrt(6.0 / static_cast<double>(d + h));
    for (double& w : m.w1) w = rng.uniform(-limit1, limit1);
    const double limit2 = std::sqrt(6.0 / static_cast<double>(h + 1));
    for (double& w : m.w2) w = rng.uniform(-limit2, limit2);
    m.b2 = 0.0;

    // deterministic validation split for early stopping
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);
    std::size_t n_val = static_cast<std::size_t>(std::floor(
        params.validation_fraction * static_cast<double>(n)));
    if (n_val >= n) n_val = n - 1;
    std::vector<int> train_idx(order.begin(), order.end() - n_val);
    std::vector<int> val_idx(order.end() - n_val, order.end());

    auto subset_loss = [&](const std::vector<int>& rows) {
        if (rows.empty()) return 0.0;
        std::vector<std::vector<double>> xs;
        std::vector<int> ys;
        xs.reserve(rows.size());
        ys.reserve(rows.size());
        for (int i : rows) {
            xs.push_back(X[i]);
            ys.push_back(y[i]);
        }
        return mlp_loss_and_gradient(m, xs, ys, nullptr);
    };

    std::vector<double> best_params = mlp_pack_params(m);
    double best_loss = val_idx.empty() ? subset_loss(train_idx) : subset_loss(val_idx);
    int stale_epochs = 0;

    std::vector<std::vector<double>> batch_x;
    std::vector<int> batch_y;
    std::vector<double> grad;
    std::vector<double> packed = mlp_pack_params(m);
    for (int epoch = 0; epoch < params.max_epochs; ++epoch) {
        rng.shuffle(train_idx);
        for (std::size_t start = 0; start < train_idx.size();
             start += static_cast<std::size_t>(params.batch_size)) {
            const std::size_t stop =
                std::min(start + static_cast<std::size_t>(params.batch_size), train_idx.size());
            batch_x.clear();
            batch_y.clear();
            for (std::size_t i = start; i < stop; ++i) {
                batch_x.push_back(X[train_idx[i]]);
                batch_y.push_back(y[train_idx[i]]);
            }
            mlp_loss_and_gradient(m, batch_x, batch_y, &grad);
            packed = mlp_pack_params(m);
            for (std::size_t i = 0; i < packed.size(); ++i)
                packed[i] -= params.step_size * grad[i];
            mlp_unpack_params(m, packed);
        }
        m.epochs_run = epoch + 1;

        const double loss = val_idx.empty() ? subset_loss(train_idx) : subset_loss(val_idx);
        if (loss < best_loss - 1e-12) {
            best_loss = loss;
            best_params = mlp_pack_params(m);
            stale_epochs = 0;
        } else {
            ++stale_epochs;
            if (stale_epochs >= params.early_stopping_patience) break;
        }
    }
    mlp_unpack_params(m, best_params);
    return m;
}

std::string MlpModel::to_json() const {
    json j;
    j["format"] = "cep-mlp";
    j["version"] = 1;
    j["params"] = {{"hidden", params.hidden},
                   {"max_epochs", params.max_epochs},
                   {"batch_size", params.batch_size},
                   {"step_size", params.step_size},
                   {"early_stopping_patience", params.early_stopping_patience},
                   {"validation_fraction", params.validation_fraction},
                   {"seed", params.seed}};
    j["activation"] = "relu";
    j["input_dim"] = input_dim;
    j["epochs_run"] = epochs_run;
    j["feature_names"] = feature_names;
    j["feature_mean"] = feature_mean;
    j["feature_scale"] = feature_scale;
    j["w1"] = w1;
    j["b1"] = b1;
    j["w2"] = w2;
    j["b2"] = b2;
    return j.dump(2);
}

MlpModel MlpModel::from_json(const std::string& text) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded() || j.value("format", "") != std::string("cep-mlp"))
        throw FormatError("not an mlp model document");
    MlpModel m;
    const json& p = j.at("params");
    m.params.hidden = p.at("hidden").get<int>();
    m.params.max_epochs = p.at("max_epochs").get<int>();
    m.params.batch_size = p.at("batch_size").get<int>();
    m.params.step_size = p.at("step_size").get<double>();
    m.params.early_stopping_patience = p.at("early_stopping_patience").get<int>();
    m.params.validation_fraction = p.at("validation_fraction").get<double>();
    m.params.seed = p.at("seed").get<std::uint64_t>();
    m.input_dim = j.at("input_dim").get<int>();
    m.epochs_run = j.value("epochs_run", 0);
    m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    m.feature_mean = j.at("feature_mean").get<std::vector<double>>();
    m.feature_scale = j.at("feature_scale").get<std::vector<double>>();
    m.w1 = j.at("w1").get<std::vector<double>>();
    m.b1 = j.at("b1").get<std::vector<double>>();
    m.w2 = j.at("w2").get<std::vector<double>>();
    m.b2 = j.at("b2").get<double>();
    return m;
}

}  // namespace cep
