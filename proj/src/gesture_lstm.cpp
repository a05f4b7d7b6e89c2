#include "swarman/gesture_lstm.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

#include "json.hpp"
#include "swarman/errors.hpp"
#include "swarman/format.hpp"

namespace swarman {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

MatrixXd sigmoid(const MatrixXd& z) { return (1.0 + (-z.array()).exp()).inverse().matrix(); }

struct LayerCache {
    std::vector<MatrixXd> gates;   // per step, activated [i; f; g; o], 4H x B
    std::vector<MatrixXd> c;       // c[0] is the zero initial state, c[t+1] after step t
    std::vector<MatrixXd> tanh_c;  // per step
    std::vector<MatrixXd> h;       // h[0] zero initial, h[t+1] after step t
};

struct ForwardCache {
    std::vector<MatrixXd> inputs;  // per step, I x B
    std::vector<LayerCache> layers;
    MatrixXd logits;
    MatrixXd probs;
};

void check_compatible(const LstmModel& model, std::span<const GestureSequence> batch) {
    if (model.layers.empty()) throw ValidationError("model has no recurrent layers");
    for (const auto& seq : batch) {
        if (seq.frames.rows() != static_cast<Index>(kSequenceLength) ||
            seq.frames.cols() != model.layers.front().W.cols()) {
            throw ValidationError("sequence shape " + std::to_string(seq.frames.rows()) + "x" +
                                  std::to_string(seq.frames.cols()) + " does not match model input " +
                                  std::to_string(kSequenceLength) + "x" +
                                  std::to_string(model.layers.front().W.cols()));
        }
    }
}

MatrixXd softmax_columns(const MatrixXd& logits) {
    MatrixXd p(logits.rows(), logits.cols());
    for (Index b = 0; b < logits.cols(); ++b) {
        const double mx = logits.col(b).maxCoeff();
        VectorXd e = (logits.col(b).array() - mx).exp();
        p.col(b) = e / e.sum();
    }
    return p;
}

void run_forward(const LstmModel& model, std::span<const GestureSequence> batch, ForwardCache& cache) {
    check_compatible(model, batch);
    const Index B = static_cast<Index>(batch.size());
    const Index T = static_cast<Index>(kSequenceLength);
    const Index I = model.layers.front().W.cols();

    cache.inputs.assign(T, MatrixXd(I, B));
    for (Index b = 0; b < B; ++b) {
        for (Index t = 0; t < T; ++t) cache.inputs[t].col(b) = batch[b].frames.row(t).transpose();
    }

    cache.layers.resize(model.layers.size());
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
        const LstmLayer& layer = model.layers[l];
        const Index H = layer.hidden();
        LayerCache& lc = cache.layers[l];
        lc.gates.assign(T, MatrixXd());
        lc.tanh_c.assign(T, MatrixXd());
        lc.c.assign(T + 1, MatrixXd::Zero(H, B));
        lc.h.assign(T + 1, MatrixXd::Zero(H, B));
        for (Index t = 0; t < T; ++t) {
            const MatrixXd& x = l == 0 ? cache.inputs[t] : cache.layers[l - 1].h[t + 1];
            MatrixXd z = layer.W * x + layer.U * lc.h[t];
            z.colwise() += layer.b;
            MatrixXd g(4 * H, B);
            g.topRows(2 * H) = sigmoid(z.topRows(2 * H));
            g.middleRows(2 * H, H) = z.middleRows(2 * H, H).array().tanh().matrix();
            g.bottomRows(H) = sigmoid(z.bottomRows(H));
            lc.c[t + 1] = (g.middleRows(H, H).array() * lc.c[t].array() +
                           g.topRows(H).array() * g.middleRows(2 * H, H).array())
                              .matrix();
            lc.tanh_c[t] = lc.c[t + 1].array().tanh().matrix();
            lc.h[t + 1] = (g.bottomRows(H).array() * lc.tanh_c[t].array()).matrix();
            lc.gates[t] = std::move(g);
        }
    }
    const MatrixXd& top = cache.layers.back().h.back();
    cache.logits = model.dense_W * top;
    cache.logits.colwise() += model.dense_b;
    cache.probs = softmax_columns(cache.logits);
}

std::size_t label_index(const GestureSequence& seq) {
    if (!seq.label) throw ValidationError("sequence has no label");
    return static_cast<std::size_t>(*seq.label);
}

double cross_entropy(const MatrixXd& logits, std::span<const GestureSequence> batch) {
    double total = 0.0;
    for (Index b = 0; b < logits.cols(); ++b) {
        const double mx = logits.col(b).maxCoeff();
        const double lse = mx + std::log((logits.col(b).array() - mx).exp().sum());
        total += lse - logits(static_cast<Index>(label_index(batch[b])), b);
    }
    return total / static_cast<double>(logits.cols());
}

template <typename Fn>
void for_each_block(LstmModel& m, Fn&& fn) {
    for (auto& layer : m.layers) {
        fn(layer.W.data(), layer.W.size());
        fn(layer.U.data(), layer.U.size());
        fn(layer.b.data(), layer.b.size());
    }
    fn(m.dense_W.data(), m.dense_W.size());
    fn(m.dense_b.data(), m.dense_b.size());
}

template <typename Fn>
void for_each_block(const LstmModel& m, Fn&& fn) {
    for (const auto& layer : m.layers) {
        fn(layer.W.data(), layer.W.size());
        fn(layer.U.data(), layer.U.size());
        fn(layer.b.data(), layer.b.size());
    }
    fn(m.dense_W.data(), m.dense_W.size());
    fn(m.dense_b.data(), m.dense_b.size());
}

}  // namespace

GestureSequence featurize(std::span<const LandmarkFrame> frames) {
    if (frames.size() != kSequenceLength) {
        throw ValidationError("gesture window needs " + std::to_string(kSequenceLength) +
                              " frames, got " + std::to_string(frames.size()));
    }
    GestureSequence seq;
    for (std::size_t t = 0; t < kSequenceLength; ++t) {
        frames[t].validate();
        const auto rel = to_head_frame(frames[t]);
        for (std::size_t k = 0; k < kLandmarkCount; ++k) {
            seq.frames.block<1, 3>(static_cast<Index>(t), static_cast<Index>(3 * k)) = rel[k].transpose();
        }
    }
    return seq;
}

LstmModel LstmModel::zeros(std::size_t input_size, std::vector<std::size_t> hidden_sizes,
                           std::size_t num_classes) {
    if (hidden_sizes.empty()) throw ValidationError("at least one recurrent layer is required");
    if (input_size == 0 || num_classes == 0) throw ValidationError("model sizes must be positive");
    LstmModel m;
    Index in = static_cast<Index>(input_size);
    for (std::size_t h : hidden_sizes) {
        if (h == 0) throw ValidationError("hidden sizes must be positive");
        const Index H = static_cast<Index>(h);
        m.layers.push_back({MatrixXd::Zero(4 * H, in), MatrixXd::Zero(4 * H, H), VectorXd::Zero(4 * H)});
        in = H;
    }
    m.dense_W = MatrixXd::Zero(static_cast<Index>(num_classes), in);
    m.dense_b = VectorXd::Zero(static_cast<Index>(num_classes));
    return m;
}

LstmModel LstmModel::initialized(std::size_t input_size, std::vector<std::size_t> hidden_sizes,
                                 std::size_t num_classes, std::uint64_t seed) {
    LstmModel m = zeros(input_size, std::move(hidden_sizes), num_classes);
    std::mt19937_64 rng(seed);
    auto glorot = [&rng](MatrixXd& w, Index fan_in, Index fan_out) {
        const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        std::uniform_real_distribution<double> dist(-limit, limit);
        for (Index j = 0; j < w.cols(); ++j) {
            for (Index i = 0; i < w.rows(); ++i) w(i, j) = dist(rng);
        }
    };
    for (auto& layer : m.layers) {
        const Index H = layer.hidden();
        glorot(layer.W, layer.W.cols(), 4 * H);
        glorot(layer.U, H, 4 * H);
        layer.b.segment(H, H).setOnes();
    }
    glorot(m.dense_W, m.dense_W.cols(), m.dense_W.rows());
    return m;
}

std::size_t LstmModel::input_size() const {
    return layers.empty() ? 0 : static_cast<std::size_t>(layers.front().W.cols());
}

std::vector<std::size_t> LstmModel::hidden_sizes() const {
    std::vector<std::size_t> out;
    for (const auto& l : layers) out.push_back(static_cast<std::size_t>(l.hidden()));
    return out;
}

std::size_t LstmModel::parameter_count() const {
    std::size_t n = 0;
    for_each_block(*this, [&n](const double*, Index size) { n += static_cast<std::size_t>(size); });
    return n;
}

void LstmModel::validate() const {
    if (layers.empty()) throw ValidationError("model has no recurrent layers");
    Index in = layers.front().W.cols();
    for (const auto& l : layers) {
        const Index H = l.U.cols();
        if (H <= 0 || l.U.rows() != 4 * H || l.W.rows() != 4 * H || l.W.cols() != in || l.b.size() != 4 * H) {
            throw ValidationError("inconsistent recurrent layer shapes");
        }
        in = H;
    }
    if (dense_W.cols() != in || dense_W.rows() != dense_b.size() || dense_b.size() == 0) {
        throw ValidationError("inconsistent output layer shapes");
    }
    bool finite = true;
    for_each_block(*this, [&finite](const double* p, Index size) {
        finite = finite && Eigen::Map<const VectorXd>(p, size).allFinite();
    });
    if (!finite) throw ValidationError("model has non-finite parameters");
}

std::vector<double> LstmModel::flat() const {
    std::vector<double> out;
    out.reserve(parameter_count());
    for_each_block(*this, [&out](const double* p, Index size) { out.insert(out.end(), p, p + size); });
    return out;
}

void LstmModel::set_flat(std::span<const double> values) {
    if (values.size() != parameter_count()) throw ValidationError("flat parameter size mismatch");
    std::size_t off = 0;
    for_each_block(*this, [&](double* p, Index size) {
        std::copy_n(values.begin() + static_cast<std::ptrdiff_t>(off), size, p);
        off += static_cast<std::size_t>(size);
    });
}

Eigen::VectorXd forward(const LstmModel& model, const GestureSequence& seq) {
    return forward_batch(model, std::span<const GestureSequence>(&seq, 1)).col(0);
}

Eigen::MatrixXd forward_batch(const LstmModel& model, std::span<const GestureSequence> batch) {
    if (batch.empty()) return MatrixXd(model.num_classes(), 0);
    ForwardCache cache;
    run_forward(model, batch, cache);
    return cache.probs;
}

double batch_loss(const LstmModel& model, std::span<const GestureSequence> batch) {
    if (batch.empty()) throw ValidationError("empty batch");
    ForwardCache cache;
    run_forward(model, batch, cache);
    return cross_entropy(cache.logits, batch);
}

LossAndGradients backward(const LstmModel& model, std::span<const GestureSequence> batch) {
    if (batch.empty()) throw ValidationError("empty batch");
    ForwardCache cache;
    run_forward(model, batch, cache);

    const Index B = static_cast<Index>(batch.size());
    const Index T = static_cast<Index>(kSequenceLength);
    const Index C = static_cast<Index>(model.num_classes());

    LossAndGradients out;
    out.loss = cross_entropy(cache.logits, batch);
    out.grads = LstmModel::zeros(model.input_size(), model.hidden_sizes(), model.num_classes());

    MatrixXd d_logits = cache.probs;
    for (Index b = 0; b < B; ++b) {
        const auto y = static_cast<Index>(label_index(batch[b]));
        if (y >= C) throw ValidationError("label outside model classes");
        Index pred = 0;
        for (Index k = 1; k < C; ++k) {
            if (cache.probs(k, b) > cache.probs(pred, b)) pred = k;
        }
        if (pred == y) ++out.correct;
        d_logits(y, b) -= 1.0;
    }
    d_logits /= static_cast<double>(B);

    const MatrixXd& top_h = cache.layers.back().h.back();
    out.grads.dense_W = d_logits * top_h.transpose();
    out.grads.dense_b = d_logits.rowwise().sum();

    // Gradient flowing into each step's hidden output from the layer above.
    std::vector<MatrixXd> d_above(T);
    for (Index t = 0; t < T; ++t) d_above[t] = MatrixXd::Zero(top_h.rows(), B);
    d_above[T - 1] = model.dense_W.transpose() * d_logits;

    for (std::size_t li = model.layers.size(); li-- > 0;) {
        const LstmLayer& layer = model.layers[li];
        LstmLayer& grad = out.grads.layers[li];
        const LayerCache& lc = cache.layers[li];
        const Index H = layer.hidden();
        const bool has_below = li > 0;
        std::vector<MatrixXd> d_below;
        if (has_below) d_below.assign(T, MatrixXd());

        MatrixXd dh_next = MatrixXd::Zero(H, B);
        MatrixXd dc_next = MatrixXd::Zero(H, B);
        MatrixXd dz(4 * H, B);
        for (Index t = T - 1; t >= 0; --t) {
            const MatrixXd& g = lc.gates[t];
            const auto ig = g.topRows(H).array();
            const auto fg = g.middleRows(H, H).array();
            const auto cg = g.middleRows(2 * H, H).array();
            const auto og = g.bottomRows(H).array();
            const auto tc = lc.tanh_c[t].array();

            const MatrixXd dh = d_above[t] + dh_next;
            const auto dha = dh.array();
            const MatrixXd dc = (dha * og * (1.0 - tc.square()) + dc_next.array()).matrix();
            const auto dca = dc.array();

            dz.topRows(H) = (dca * cg * ig * (1.0 - ig)).matrix();
            dz.middleRows(H, H) = (dca * lc.c[t].array() * fg * (1.0 - fg)).matrix();
            dz.middleRows(2 * H, H) = (dca * ig * (1.0 - cg.square())).matrix();
            dz.bottomRows(H) = (dha * tc * og * (1.0 - og)).matrix();
            dc_next = (dca * fg).matrix();

            const MatrixXd& x = has_below ? cache.layers[li - 1].h[t + 1] : cache.inputs[t];
            grad.W.noalias() += dz * x.transpose();
            grad.U.noalias() += dz * lc.h[t].transpose();
            grad.b += dz.rowwise().sum();
            dh_next.noalias() = layer.U.transpose() * dz;
            if (has_below) d_below[t].noalias() = layer.W.transpose() * dz;
        }
        if (has_below) d_above = std::move(d_below);
    }
    return out;
}

void TrainConfig::validate() const {
    if (epochs < 1) throw ValidationError("train.epochs must be >= 1");
    if (batch_size < 1) throw ValidationError("train.batch_size must be >= 1");
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
        throw ValidationError("train.learning_rate must be >= 0");
    }
    if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
        throw ValidationError("train.beta1/beta2 must be in [0, 1)");
    }
    if (!(epsilon > 0.0)) throw ValidationError("train.epsilon must be > 0");
    if (!(clip_norm >= 0.0)) throw ValidationError("train.clip_norm must be >= 0");
    if (!(validation_split > 0.0 && validation_split < 1.0)) {
        throw ValidationError("train.validation_split must be in (0, 1)");
    }
}

void AdamState::apply(std::vector<double>& params, std::span<const double> grads, const TrainConfig& cfg) {
    if (params.size() != grads.size() || params.size() != m_.size()) {
        throw ValidationError("optimizer size mismatch");
    }
    ++t_;
    if (cfg.optimizer == Optimizer::Sgd) {
        for (std::size_t k = 0; k < params.size(); ++k) params[k] -= cfg.learning_rate * grads[k];
        return;
    }
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t_));
    for (std::size_t k = 0; k < params.size(); ++k) {
        m_[k] = cfg.beta1 * m_[k] + (1.0 - cfg.beta1) * grads[k];
        v_[k] = cfg.beta2 * v_[k] + (1.0 - cfg.beta2) * grads[k] * grads[k];
        const double mhat = m_[k] / bc1;
        const double vhat = v_[k] / bc2;
        params[k] -= cfg.learning_rate * mhat / (std::sqrt(vhat) + cfg.epsilon);
    }
}

TrainResult train(LstmModel model, const GestureDataset& dataset, const TrainConfig& cfg) {
    cfg.validate();
    model.validate();
    if (dataset.empty()) throw ValidationError("training dataset is empty");
    std::vector<bool> present(model.num_classes(), false);
    for (const auto& s : dataset) {
        const std::size_t y = label_index(s);
        if (y >= present.size()) throw ValidationError("label outside model classes");
        present[y] = true;
    }
    if (std::count(present.begin(), present.end(), true) < 2) {
        throw ValidationError("training needs at least two classes");
    }
    check_compatible(model, dataset);

    std::mt19937_64 rng(cfg.seed);
    std::vector<std::size_t> order(dataset.size());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    const auto n_val = static_cast<std::size_t>(std::floor(cfg.validation_split * static_cast<double>(dataset.size())));
    if (n_val >= dataset.size()) throw ValidationError("validation split leaves no training samples");
    std::vector<std::size_t> train_idx(order.begin(), order.end() - static_cast<std::ptrdiff_t>(n_val));
    GestureDataset val_set;
    for (std::size_t k = dataset.size() - n_val; k < dataset.size(); ++k) val_set.push_back(dataset[order[k]]);

    std::vector<double> params = model.flat();
    AdamState opt(params.size());
    TrainResult result;
    GestureDataset batch;
    for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
        std::shuffle(train_idx.begin(), train_idx.end(), rng);
        double loss_sum = 0.0;
        std::size_t correct = 0;
        for (std::size_t start = 0; start < train_idx.size(); start += cfg.batch_size) {
            const std::size_t end = std::min(start + cfg.batch_size, train_idx.size());
            batch.clear();
            for (std::size_t k = start; k < end; ++k) batch.push_back(dataset[train_idx[k]]);

            LossAndGradients lg = backward(model, batch);
            loss_sum += lg.loss * static_cast<double>(batch.size());
            correct += lg.correct;

            std::vector<double> g = lg.grads.flat();
            if (cfg.clip_norm > 0.0) {
                double sq = 0.0;
                for (double v : g) sq += v * v;
                const double norm = std::sqrt(sq);
                if (norm > cfg.clip_norm) {
                    for (double& v : g) v *= cfg.clip_norm / norm;
                }
            }
            opt.apply(params, g, cfg);
            model.set_flat(params);
        }
        EpochStats st;
        st.epoch = epoch;
        st.train_loss = loss_sum / static_cast<double>(train_idx.size());
        st.train_acc = static_cast<double>(correct) / static_cast<double>(train_idx.size());
        if (val_set.empty()) {
            st.val_loss = st.val_acc = std::numeric_limits<double>::quiet_NaN();
        } else {
            const Evaluation ev = evaluate(model, val_set);
            st.val_loss = ev.loss;
            st.val_acc = ev.accuracy;
        }
        result.history.push_back(st);
    }
    model.validate();
    result.model = std::move(model);
    return result;
}

Classification classify_probabilities(const Eigen::VectorXd& probs) {
    if (probs.size() == 0 || probs.size() > static_cast<Index>(kEmotionCount)) {
        throw ValidationError("probability vector has wrong length");
    }
    Index best = 0;
    for (Index k = 1; k < probs.size(); ++k) {
        if (probs[k] > probs[best]) best = k;
    }
    return {kAllEmotions[static_cast<std::size_t>(best)], probs[best]};
}

Classification classify(const LstmModel& model, const GestureSequence& seq) {
    return classify_probabilities(forward(model, seq));
}

std::vector<WindowLabel> classify_stream(const LstmModel& model, std::span<const LandmarkFrame> frames,
                                         std::size_t stride) {
    if (stride == 0) throw ValidationError("window stride must be >= 1");
    std::vector<WindowLabel> out;
    if (frames.size() < kSequenceLength) return out;
    for (std::size_t start = 0; start + kSequenceLength <= frames.size(); start += stride) {
        const auto window = frames.subspan(start, kSequenceLength);
        out.push_back({window.back().t, classify(model, featurize(window))});
    }
    return out;
}

Evaluation evaluate(const LstmModel& model, const GestureDataset& dataset) {
    const auto C = static_cast<Index>(model.num_classes());
    Evaluation ev;
    ev.confusion = Eigen::MatrixXi::Zero(C, C);
    ev.recall.assign(static_cast<std::size_t>(C), std::numeric_limits<double>::quiet_NaN());
    if (dataset.empty()) return ev;

    constexpr std::size_t kChunk = 256;
    double loss_sum = 0.0;
    const std::span<const GestureSequence> all(dataset);
    for (std::size_t start = 0; start < dataset.size(); start += kChunk) {
        const auto chunk = all.subspan(start, std::min(kChunk, dataset.size() - start));
        ForwardCache cache;
        run_forward(model, chunk, cache);
        loss_sum += cross_entropy(cache.logits, chunk) * static_cast<double>(chunk.size());
        for (std::size_t b = 0; b < chunk.size(); ++b) {
            const auto pred = static_cast<Index>(
                classify_probabilities(cache.probs.col(static_cast<Index>(b))).label);
            ev.confusion(static_cast<Index>(label_index(chunk[b])), pred) += 1;
        }
    }
    ev.loss = loss_sum / static_cast<double>(dataset.size());
    ev.accuracy = static_cast<double>(ev.confusion.trace()) / static_cast<double>(dataset.size());
    for (Index k = 0; k < C; ++k) {
        const int total = ev.confusion.row(k).sum();
        if (total > 0) ev.recall[static_cast<std::size_t>(k)] = static_cast<double>(ev.confusion(k, k)) / total;
    }
    return ev;
}

std::pair<GestureDataset, GestureDataset> split_dataset(const GestureDataset& dataset,
                                                        double test_fraction, std::uint64_t seed) {
    if (!(test_fraction >= 0.0 && test_fraction <= 1.0)) throw ValidationError("test fraction must be in [0, 1]");
    std::vector<std::vector<std::size_t>> by_class(kEmotionCount);
    for (std::size_t i = 0; i < dataset.size(); ++i) by_class.at(label_index(dataset[i])).push_back(i);
    std::mt19937_64 rng(seed);
    std::vector<std::size_t> first_idx, second_idx;
    for (auto& idx : by_class) {
        std::shuffle(idx.begin(), idx.end(), rng);
        const auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(idx.size())));
        second_idx.insert(second_idx.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_test));
        first_idx.insert(first_idx.end(), idx.begin() + static_cast<std::ptrdiff_t>(n_test), idx.end());
    }
    std::sort(first_idx.begin(), first_idx.end());
    std::sort(second_idx.begin(), second_idx.end());
    std::pair<GestureDataset, GestureDataset> out;
    for (std::size_t i : first_idx) out.first.push_back(dataset[i]);
    for (std::size_t i : second_idx) out.second.push_back(dataset[i]);
    return out;
}

// --- serialization ---------------------------------------------------------

namespace {

using nlohmann::json;

json matrix_to_json(const MatrixXd& m) {
    json arr = json::array();
    for (Index i = 0; i < m.rows(); ++i) {
        for (Index j = 0; j < m.cols(); ++j) arr.push_back(m(i, j));
    }
    return arr;
}

void matrix_from_json(const json& arr, MatrixXd& m, const char* what) {
    if (!arr.is_array() || arr.size() != static_cast<std::size_t>(m.size())) {
        throw SchemaError(std::string("model parameter \"") + what + "\" has wrong size");
    }
    std::size_t k = 0;
    for (Index i = 0; i < m.rows(); ++i) {
        for (Index j = 0; j < m.cols(); ++j) m(i, j) = arr.at(k++).get<double>();
    }
}

}  // namespace

std::string model_to_json(const LstmModel& model) {
    model.validate();
    json j;
    j["format_version"] = kModelFormatVersion;
    j["input_size"] = model.input_size();
    j["hidden_sizes"] = model.hidden_sizes();
    j["num_classes"] = model.num_classes();
    json labels = json::array();
    for (std::size_t k = 0; k < model.num_classes() && k < kEmotionCount; ++k) {
        labels.push_back(std::string(emotion_name(kAllEmotions[k])));
    }
    j["labels"] = labels;
    json layers = json::array();
    for (const auto& l : model.layers) {
        layers.push_back({{"W", matrix_to_json(l.W)}, {"U", matrix_to_json(l.U)}, {"b", matrix_to_json(l.b)}});
    }
    j["layers"] = layers;
    j["dense"] = {{"W", matrix_to_json(model.dense_W)}, {"b", matrix_to_json(model.dense_b)}};
    return j.dump();
}

LstmModel model_from_json(const std::string& text) {
    try {
        const json j = json::parse(text);
        if (j.at("format_version").get<int>() != kModelFormatVersion) {
            throw SchemaError("unsupported model format_version " + j.at("format_version").dump());
        }
        LstmModel m = LstmModel::zeros(j.at("input_size").get<std::size_t>(),
                                       j.at("hidden_sizes").get<std::vector<std::size_t>>(),
                                       j.at("num_classes").get<std::size_t>());
        const json& layers = j.at("layers");
        if (!layers.is_array() || layers.size() != m.layers.size()) throw SchemaError("model layer count mismatch");
        for (std::size_t l = 0; l < m.layers.size(); ++l) {
            matrix_from_json(layers[l].at("W"), m.layers[l].W, "W");
            matrix_from_json(layers[l].at("U"), m.layers[l].U, "U");
            MatrixXd b = m.layers[l].b;
            matrix_from_json(layers[l].at("b"), b, "b");
            m.layers[l].b = b;
        }
        matrix_from_json(j.at("dense").at("W"), m.dense_W, "dense.W");
        MatrixXd db = m.dense_b;
        matrix_from_json(j.at("dense").at("b"), db, "dense.b");
        m.dense_b = db;
        m.validate();
        return m;
    } catch (const json::exception& e) {
        throw SchemaError(std::string("bad model file: ") + e.what());
    }
}

void save_model(const LstmModel& model, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write model " + path.string());
    out << model_to_json(model) << '\n';
}

LstmModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open model " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return model_from_json(ss.str());
}

void write_dataset(std::ostream& out, const GestureDataset& dataset) {
    for (const auto& seq : dataset) {
        out << '{';
        if (seq.label) out << "\"label\":\"" << emotion_name(*seq.label) << "\",";
        out << "\"frames\":[";
        for (Index t = 0; t < seq.frames.rows(); ++t) {
            out << (t ? ",[" : "[");
            for (Index k = 0; k < seq.frames.cols(); ++k) out << (k ? "," : "") << format_double(seq.frames(t, k));
            out << ']';
        }
        out << "]}\n";
    }
}

GestureDataset read_dataset(std::istream& in) {
    GestureDataset out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            const json rec = json::parse(line);
            GestureSequence seq;
            if (rec.contains("label")) seq.label = emotion_from_name(rec.at("label").get<std::string>());
            const json& frames = rec.at("frames");
            if (!frames.is_array() || frames.size() != kSequenceLength) {
                throw SchemaError("\"frames\" must hold " + std::to_string(kSequenceLength) + " rows");
            }
            for (std::size_t t = 0; t < kSequenceLength; ++t) {
                const json& row = frames[t];
                if (!row.is_array() || row.size() != kFeatureCount) {
                    throw SchemaError("frame row must hold " + std::to_string(kFeatureCount) + " numbers");
                }
                for (std::size_t k = 0; k < kFeatureCount; ++k) {
                    seq.frames(static_cast<Index>(t), static_cast<Index>(k)) = row[k].get<double>();
                }
            }
            out.push_back(std::move(seq));
        } catch (const json::exception& e) {
            throw SchemaError(e.what(), lineno);
        } catch (const SchemaError& e) {
            throw SchemaError(e.what(), lineno);
        } catch (const ValidationError& e) {
            throw SchemaError(e.what(), lineno);
        }
    }
    return out;
}

GestureDataset load_dataset(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open dataset " + path.string());
    return read_dataset(in);
}

void write_history_csv(std::ostream& out, std::span<const EpochStats> history) {
    out << "epoch,train_loss,train_acc,val_loss,val_acc\n";
    for (const auto& h : history) {
        out << h.epoch << ',' << format_double(h.train_loss) << ',' << format_double(h.train_acc) << ','
            << format_double(h.val_loss) << ',' << format_double(h.val_acc) << '\n';
    }
}

}  // namespace swarman
