#pragma once

// Stacked-LSTM gesture classifier over fixed-length landmark windows,
// trained with backpropagation through time.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "swarman/emotion.hpp"
#include "swarman/pose_model.hpp"

namespace swarman {

inline constexpr std::size_t kSequenceLength = 30;
inline constexpr std::size_t kFeatureCount = 3 * kLandmarkCount;

/// One window: row t holds the head-relative coordinates of all nine
/// landmarks at frame t, in roster order (x, y, z per landmark).
struct GestureSequence {
    Eigen::MatrixXd frames = Eigen::MatrixXd::Zero(kSequenceLength, kFeatureCount);
    std::optional<Emotion> label;
};

using GestureDataset = std::vector<GestureSequence>;

/// Head-relative feature window from exactly kSequenceLength valid frames.
GestureSequence featurize(std::span<const LandmarkFrame> frames);

/// Gate weights stacked as [input; forget; candidate; output] blocks of `hidden` rows.
struct LstmLayer {
    Eigen::MatrixXd W;  // 4H x I
    Eigen::MatrixXd U;  // 4H x H
    Eigen::VectorXd b;  // 4H

    Eigen::Index hidden() const { return U.cols(); }
    Eigen::Index input() const { return W.cols(); }
};

class LstmModel {
public:
    LstmModel() = default;

    /// All parameters zero.
    static LstmModel zeros(std::size_t input_size, std::vector<std::size_t> hidden_sizes,
                           std::size_t num_classes);

    /// Glorot-uniform weights, zero biases except forget-gate biases of 1.
    static LstmModel initialized(std::size_t input_size, std::vector<std::size_t> hidden_sizes,
                                 std::size_t num_classes, std::uint64_t seed);

    std::size_t input_size() const;
    std::vector<std::size_t> hidden_sizes() const;
    std::size_t num_classes() const { return static_cast<std::size_t>(dense_b.size()); }
    std::size_t parameter_count() const;

    /// Throws ValidationError on inconsistent shapes or non-finite values.
    void validate() const;

    /// Parameters flattened in a fixed order (layer by layer W, U, b; then dense W, b).
    std::vector<double> flat() const;
    void set_flat(std::span<const double> values);

    std::vector<LstmLayer> layers;
    Eigen::MatrixXd dense_W;  // C x H_last
    Eigen::VectorXd dense_b;  // C
};

/// Gradients share the model's layout.
using LstmGradients = LstmModel;

/// Class probabilities for one sequence (softmax of the final affine layer
/// applied to the last hidden state of the top layer).
Eigen::VectorXd forward(const LstmModel& model, const GestureSequence& seq);

/// Column b holds the probabilities for sequences[b].
Eigen::MatrixXd forward_batch(const LstmModel& model, std::span<const GestureSequence> batch);

struct LossAndGradients {
    double loss = 0.0;  // mean cross-entropy over the batch
    std::size_t correct = 0;
    LstmGradients grads;
};

/// Mean cross-entropy of the labeled batch and its exact gradient via BPTT.
LossAndGradients backward(const LstmModel& model, std::span<const GestureSequence> batch);

/// Mean cross-entropy only.
double batch_loss(const LstmModel& model, std::span<const GestureSequence> batch);

enum class Optimizer { Adam, Sgd };

struct TrainConfig {
    std::size_t epochs = 100;
    std::size_t batch_size = 32;
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    double clip_norm = 5.0;  // global gradient-norm cap, 0 disables
    double validation_split = 0.2;
    Optimizer optimizer = Optimizer::Adam;
    std::uint64_t seed = 42;

    void validate() const;
};

struct EpochStats {
    std::size_t epoch = 0;  // 1-based
    double train_loss = 0.0;
    double train_acc = 0.0;
    double val_loss = 0.0;  // NaN when the split leaves no validation samples
    double val_acc = 0.0;
};

struct TrainResult {
    LstmModel model;
    std::vector<EpochStats> history;
};

/// Minibatch training on a seeded shuffle. The last validation_split share of
/// a seeded permutation is held out for the validation columns of the history.
/// Throws ValidationError on an empty dataset, unlabeled samples or fewer
/// than two classes.
TrainResult train(LstmModel model, const GestureDataset& dataset, const TrainConfig& cfg);

/// Applies one optimizer update in place. Exposed for testing the update rule.
class AdamState {
public:
    explicit AdamState(std::size_t n) : m_(n, 0.0), v_(n, 0.0) {}
    void apply(std::vector<double>& params, std::span<const double> grads, const TrainConfig& cfg);

private:
    std::vector<double> m_;
    std::vector<double> v_;
    std::size_t t_ = 0;
};

struct Classification {
    Emotion label = Emotion::Happy;
    double confidence = 0.0;
};

/// Argmax; ties go to the lowest class index.
Classification classify_probabilities(const Eigen::VectorXd& probs);
Classification classify(const LstmModel& model, const GestureSequence& seq);

struct WindowLabel {
    double t = 0.0;  // time of the last frame in the window
    Classification result;
};

/// Sliding windows of kSequenceLength frames, `stride` frames apart.
std::vector<WindowLabel> classify_stream(const LstmModel& model, std::span<const LandmarkFrame> frames,
                                         std::size_t stride = 1);

struct Evaluation {
    double loss = 0.0;
    double accuracy = 0.0;
    std::vector<double> recall;  // per class; NaN for classes absent from the data
    Eigen::MatrixXi confusion;   // rows = true class, cols = predicted
};

Evaluation evaluate(const LstmModel& model, const GestureDataset& dataset);

/// Seeded stratified split; `test_fraction` of each class goes to `second`.
std::pair<GestureDataset, GestureDataset> split_dataset(const GestureDataset& dataset,
                                                        double test_fraction, std::uint64_t seed);

inline constexpr int kModelFormatVersion = 1;

void save_model(const LstmModel& model, const std::filesystem::path& path);
LstmModel load_model(const std::filesystem::path& path);
std::string model_to_json(const LstmModel& model);
LstmModel model_from_json(const std::string& text);

void write_dataset(std::ostream& out, const GestureDataset& dataset);
GestureDataset read_dataset(std::istream& in);
GestureDataset load_dataset(const std::filesystem::path& path);

void write_history_csv(std::ostream& out, std::span<const EpochStats> history);

}  // namespace swarman
