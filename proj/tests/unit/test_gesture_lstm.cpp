#include <cmath>
#include <filesystem>
#include <random>
#include <sstream>

#include "doctest.h"
#include "lstm_oracle.hpp"
#include "swarman/errors.hpp"
#include "swarman/gesture_lstm.hpp"
#include "swarman/synthetic_gestures.hpp"
#include "test_support.hpp"

using namespace swarman;

namespace {

double sig(double z) { return 1.0 / (1.0 + std::exp(-z)); }

std::vector<LandmarkFrame> repeated(const LandmarkFrame& f, std::size_t n) {
    std::vector<LandmarkFrame> out(n, f);
    for (std::size_t t = 0; t < n; ++t) out[t].t = static_cast<double>(t) / 30.0;
    return out;
}

GestureDataset toy_dataset(std::size_t per_class, std::uint64_t seed) {
    // Class k shifts feature column 3 + k; easily separable.
    std::mt19937_64 rng(seed);
    GestureDataset d;
    for (std::size_t i = 0; i < per_class; ++i) {
        for (std::size_t k = 0; k < 3; ++k) {
            GestureSequence s = testing::random_sequence(rng, 0.1, kAllEmotions[k]);
            s.frames.col(static_cast<Eigen::Index>(3 + k)).array() += 1.0;
            d.push_back(s);
        }
    }
    return d;
}

}  // namespace

TEST_CASE("featurize") {
    std::mt19937_64 rng(8);
    const LandmarkFrame f = testing::random_frame(rng);

    SUBCASE("identical frames give identical rows") {
        const GestureSequence s = featurize(repeated(f, 30));
        REQUIRE(s.frames.rows() == 30);
        REQUIRE(s.frames.cols() == 27);
        for (Eigen::Index t = 1; t < 30; ++t) CHECK(s.frames.row(t) == s.frames.row(0));
        for (std::size_t k = 0; k < kLandmarkCount; ++k) {
            const Vec3 rel = f.landmarks[k] - f[Landmark::Head];
            for (int c = 0; c < 3; ++c) CHECK(s.frames(0, static_cast<Eigen::Index>(3 * k + c)) == rel[c]);
        }
        CHECK(s.frames.leftCols(3).isZero(0.0));
        CHECK_FALSE(s.label.has_value());
    }
    SUBCASE("wrong frame count") {
        CHECK_THROWS_AS(featurize(repeated(f, 29)), ValidationError);
        CHECK_THROWS_AS(featurize(repeated(f, 31)), ValidationError);
    }
    SUBCASE("invalid frame") {
        auto frames = repeated(f, 30);
        frames[17][Landmark::Torso].y() = std::nan("");
        CHECK_THROWS_AS(featurize(frames), ValidationError);
    }
    SUBCASE("head-relative invariance") {
        auto moving = repeated(f, 30);
        std::uniform_real_distribution<double> u(-0.5, 0.5);
        for (auto& fr : moving) {
            const Vec3 offset(u(rng), u(rng), u(rng));
            for (auto& p : fr.landmarks) p += offset;
        }
        const GestureSequence a = featurize(repeated(f, 30));
        const GestureSequence b = featurize(moving);
        CHECK((a.frames - b.frames).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("forward: zero model is uniform") {
    const LstmModel m = LstmModel::zeros(27, {64, 32}, 5);
    std::mt19937_64 rng(1);
    const Eigen::VectorXd p = forward(m, testing::random_sequence(rng, 1.0, std::nullopt));
    REQUIRE(p.size() == 5);
    for (Eigen::Index k = 0; k < 5; ++k) CHECK(p[k] == doctest::Approx(0.2).epsilon(1e-15));
    const Classification c = classify(m, testing::random_sequence(rng, 1.0, std::nullopt));
    CHECK(c.label == Emotion::Happy);
    CHECK(c.confidence == doctest::Approx(0.2));
}

TEST_CASE("forward: softmax normalization") {
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 50; ++trial) {
        const LstmModel m = testing::random_model(27, {4, 3}, 5, rng, 2.0);
        const Eigen::VectorXd p = forward(m, testing::random_sequence(rng, 3.0, std::nullopt));
        CHECK(std::abs(p.sum() - 1.0) <= 1e-9);
        CHECK(p.minCoeff() > 0.0);
        CHECK(p.maxCoeff() < 1.0);
    }
}

TEST_CASE("forward: hand-traced two-step recurrence") {
    // Zero input and zero biases keep h and c at exactly zero (every gate
    // opens halfway onto a zero candidate), so only the last two frames,
    // which hold the constant input x = 1 in feature 3, drive the state.
    LstmModel m = LstmModel::zeros(27, {2}, 5);
    LstmLayer& L = m.layers[0];
    const double wi[2] = {0.5, -0.3}, wf[2] = {0.2, 0.4}, wg[2] = {0.7, -0.6}, wo[2] = {0.1, 0.3};
    const double U[4][2][2] = {{{0.1, -0.2}, {0.3, 0.05}},    // i
                               {{-0.1, 0.2}, {0.0, 0.15}},    // f
                               {{0.4, 0.1}, {-0.3, 0.2}},     // g
                               {{0.05, -0.05}, {0.2, -0.1}}};  // o
    const double* w[4] = {wi, wf, wg, wo};
    for (int gate = 0; gate < 4; ++gate) {
        for (int r = 0; r < 2; ++r) {
            L.W(2 * gate + r, 3) = w[gate][r];
            for (int c = 0; c < 2; ++c) L.U(2 * gate + r, c) = U[gate][r][c];
        }
    }
    const double D[5][2] = {{1.0, -1.0}, {0.5, 0.5}, {-0.7, 0.2}, {0.0, 1.5}, {0.3, -0.4}};
    const double db[5] = {0.1, 0.0, -0.1, 0.2, 0.0};
    for (int k = 0; k < 5; ++k) {
        m.dense_W(k, 0) = D[k][0];
        m.dense_W(k, 1) = D[k][1];
        m.dense_b[k] = db[k];
    }

    GestureSequence seq;
    seq.frames(28, 3) = 1.0;
    seq.frames(29, 3) = 1.0;

    double h[2] = {0.0, 0.0}, c[2] = {0.0, 0.0};
    for (int step = 0; step < 2; ++step) {
        double z[4][2];
        for (int gate = 0; gate < 4; ++gate) {
            for (int r = 0; r < 2; ++r) z[gate][r] = w[gate][r] * 1.0 + U[gate][r][0] * h[0] + U[gate][r][1] * h[1];
        }
        double hn[2];
        for (int r = 0; r < 2; ++r) {
            const double i = sig(z[0][r]), f = sig(z[1][r]), g = std::tanh(z[2][r]), o = sig(z[3][r]);
            c[r] = f * c[r] + i * g;
            hn[r] = o * std::tanh(c[r]);
        }
        h[0] = hn[0];
        h[1] = hn[1];
    }
    double logits[5], mx = -1e300, sum = 0.0;
    for (int k = 0; k < 5; ++k) {
        logits[k] = D[k][0] * h[0] + D[k][1] * h[1] + db[k];
        mx = std::max(mx, logits[k]);
    }
    for (double& l : logits) sum += std::exp(l - mx);

    const Eigen::VectorXd p = forward(m, seq);
    for (int k = 0; k < 5; ++k) CHECK(p[k] == doctest::Approx(std::exp(logits[k] - mx) / sum).epsilon(1e-13));
}

TEST_CASE("backward matches finite differences") {
    std::mt19937_64 rng(1);
    const LstmModel m = testing::random_model(27, {3, 2}, 5, rng, 0.5);
    std::vector<GestureSequence> batch;
    for (int i = 0; i < 3; ++i) batch.push_back(testing::random_sequence(rng, 0.5, kAllEmotions[i]));
    const auto r = testing::check_gradients(m, batch, 1e-5, 1e-8);
    CHECK(r.parameters == m.parameter_count());
    CHECK(r.max_rel_error < 1e-4);

    const LossAndGradients lg = backward(m, batch);
    CHECK(lg.loss == doctest::Approx(batch_loss(m, batch)).epsilon(1e-14));
    CHECK(lg.grads.parameter_count() == m.parameter_count());
}

TEST_CASE("backward: duplicated sample averages to the same gradient") {
    std::mt19937_64 rng(5);
    const LstmModel m = testing::random_model(27, {4}, 5, rng, 0.5);
    const GestureSequence s = testing::random_sequence(rng, 0.5, Emotion::Angry);
    const std::vector<GestureSequence> one{s}, two{s, s};
    const auto a = backward(m, one), b = backward(m, two);
    CHECK(a.loss == doctest::Approx(b.loss).epsilon(1e-15));
    const auto ga = a.grads.flat(), gb = b.grads.flat();
    double worst = 0.0;
    for (std::size_t k = 0; k < ga.size(); ++k) worst = std::max(worst, std::abs(ga[k] - gb[k]));
    CHECK(worst < 1e-15);
}

TEST_CASE("backward requires labels") {
    std::mt19937_64 rng(6);
    const LstmModel m = testing::random_model(27, {2}, 5, rng, 0.5);
    const std::vector<GestureSequence> batch{testing::random_sequence(rng, 0.5, std::nullopt)};
    CHECK_THROWS_AS(backward(m, batch), ValidationError);
}

TEST_CASE("optimizer updates") {
    TrainConfig cfg;
    cfg.learning_rate = 0.0;
    std::vector<double> params{1.0, -2.0, 3.5};
    const std::vector<double> grads{0.3, -0.7, 10.0};
    AdamState adam(3);
    adam.apply(params, grads, cfg);
    CHECK(params == std::vector<double>{1.0, -2.0, 3.5});
    cfg.optimizer = Optimizer::Sgd;
    adam.apply(params, grads, cfg);
    CHECK(params == std::vector<double>{1.0, -2.0, 3.5});

    cfg.learning_rate = 0.1;
    adam.apply(params, grads, cfg);
    CHECK(params[0] == doctest::Approx(1.0 - 0.03));

    // First Adam step moves each parameter by ~lr against its gradient sign.
    TrainConfig ac;
    ac.learning_rate = 0.01;
    std::vector<double> q{0.0, 0.0};
    AdamState fresh(2);
    fresh.apply(q, std::vector<double>{4.0, -0.001}, ac);
    CHECK(q[0] == doctest::Approx(-0.01).epsilon(1e-6));
    CHECK(q[1] == doctest::Approx(0.01).epsilon(1e-4));

    CHECK_THROWS_AS(fresh.apply(q, std::vector<double>{1.0}, ac), ValidationError);
}

TEST_CASE("train: zero learning rate leaves parameters unchanged") {
    const LstmModel m = LstmModel::initialized(27, {4}, 5, 3);
    TrainConfig cfg;
    cfg.epochs = 2;
    cfg.learning_rate = 0.0;
    const TrainResult r = train(m, toy_dataset(4, 1), cfg);
    CHECK(r.model.flat() == m.flat());
    CHECK(r.history.size() == 2);
}

TEST_CASE("train: input validation") {
    const LstmModel m = LstmModel::initialized(27, {4}, 5, 3);
    TrainConfig cfg;
    cfg.epochs = 1;
    CHECK_THROWS_AS(train(m, {}, cfg), ValidationError);

    GestureDataset one_class = toy_dataset(3, 2);
    for (auto& s : one_class) s.label = Emotion::Sad;
    CHECK_THROWS_AS(train(m, one_class, cfg), ValidationError);

    GestureDataset unlabeled = toy_dataset(3, 2);
    unlabeled[4].label.reset();
    CHECK_THROWS_AS(train(m, unlabeled, cfg), ValidationError);

    TrainConfig bad = cfg;
    bad.validation_split = 1.0;
    CHECK_THROWS_AS(train(m, toy_dataset(3, 2), bad), ValidationError);
    bad = cfg;
    bad.epochs = 0;
    CHECK_THROWS_AS(train(m, toy_dataset(3, 2), bad), ValidationError);
}

TEST_CASE("train: loss trend and determinism") {
    const LstmModel m = LstmModel::initialized(27, {8}, 5, 9);
    const GestureDataset data = toy_dataset(10, 4);
    TrainConfig cfg;
    cfg.epochs = 15;
    cfg.batch_size = 8;
    cfg.learning_rate = 0.01;
    const TrainResult a = train(m, data, cfg);
    const TrainResult b = train(m, data, cfg);
    REQUIRE(a.history.size() == 15);
    CHECK(a.history.back().train_loss < a.history.front().train_loss);
    CHECK(a.history.back().train_acc >= 0.9);
    CHECK(a.model.flat() == b.model.flat());
    for (std::size_t e = 0; e < a.history.size(); ++e) {
        CHECK(a.history[e].train_loss == b.history[e].train_loss);
        CHECK(a.history[e].val_loss == b.history[e].val_loss);
        CHECK(a.history[e].epoch == e + 1);
    }
    cfg.seed = 43;
    CHECK(train(m, data, cfg).model.flat() != a.model.flat());
}

TEST_CASE("classification") {
    Eigen::VectorXd p(5);
    p << 0.1, 0.6, 0.1, 0.1, 0.1;
    Classification c = classify_probabilities(p);
    CHECK(c.label == Emotion::Sad);
    CHECK(c.confidence == 0.6);
    p << 0.2, 0.2, 0.2, 0.2, 0.2;
    CHECK(classify_probabilities(p).label == Emotion::Happy);
    p << 0.1, 0.1, 0.3, 0.3, 0.2;
    CHECK(classify_probabilities(p).label == Emotion::Angry);
    CHECK_THROWS_AS(classify_probabilities(Eigen::VectorXd(6)), ValidationError);
}

TEST_CASE("classify_stream windows") {
    const LstmModel m = LstmModel::zeros(27, {2}, 5);
    std::mt19937_64 rng(3);
    auto frames = repeated(testing::random_frame(rng), 40);
    const auto every = classify_stream(m, frames, 1);
    REQUIRE(every.size() == 11);
    CHECK(every.front().t == frames[29].t);
    CHECK(every.back().t == frames[39].t);
    CHECK(classify_stream(m, frames, 4).size() == 3);
    CHECK(classify_stream(m, std::span(frames).first(29), 1).empty());
    CHECK_THROWS_AS(classify_stream(m, frames, 0), ValidationError);
}

TEST_CASE("evaluate and split") {
    const GestureDataset data = generate_synthetic_dataset(10, kDefaultNoiseLevel, 1);
    const auto [train_set, test_set] = split_dataset(data, 0.2, 7);
    CHECK(train_set.size() == 40);
    CHECK(test_set.size() == 10);
    std::array<int, 5> per{};
    for (const auto& s : test_set) ++per[static_cast<std::size_t>(*s.label)];
    for (int n : per) CHECK(n == 2);

    const Evaluation ev = evaluate(LstmModel::zeros(27, {2}, 5), test_set);
    CHECK(ev.accuracy == doctest::Approx(0.2));
    CHECK(ev.loss == doctest::Approx(std::log(5.0)));
    CHECK(ev.confusion.col(0).sum() == 10);
    CHECK(ev.recall[0] == 1.0);
    CHECK(ev.recall[3] == 0.0);
    const GestureDataset only_happy(test_set.begin(), test_set.begin() + 1);
    CHECK(std::isnan(evaluate(LstmModel::zeros(27, {2}, 5), only_happy).recall[1]));
}

TEST_CASE("model serialization round trip") {
    const LstmModel m = LstmModel::initialized(27, {5, 3}, 5, 12);
    const LstmModel back = model_from_json(model_to_json(m));
    CHECK(back.flat() == m.flat());
    CHECK(back.hidden_sizes() == std::vector<std::size_t>{5, 3});

    const auto path = std::filesystem::temp_directory_path() / "swarman_test_model.json";
    save_model(m, path);
    CHECK(load_model(path).flat() == m.flat());
    std::filesystem::remove(path);

    CHECK_THROWS_AS(model_from_json("{"), SchemaError);
    CHECK_THROWS_AS(model_from_json(R"({"format_version": 99})"), SchemaError);
    CHECK_THROWS(load_model(path));
}

TEST_CASE("dataset serialization round trip") {
    const GestureDataset d = generate_synthetic_dataset(2, kDefaultNoiseLevel, 5);
    std::stringstream ss;
    write_dataset(ss, d);
    const std::string text = ss.str();
    const GestureDataset back = read_dataset(ss);
    REQUIRE(back.size() == d.size());
    for (std::size_t i = 0; i < d.size(); ++i) {
        CHECK(back[i].frames == d[i].frames);
        CHECK(back[i].label == d[i].label);
    }
    std::stringstream again;
    write_dataset(again, back);
    CHECK(again.str() == text);

    std::stringstream bad(R"({"label":"happy","frames":[[0,0,0]]})");
    CHECK_THROWS_AS(read_dataset(bad), SchemaError);
    std::stringstream unknown(R"({"label":"bored","frames":[]})");
    CHECK_THROWS(read_dataset(unknown));
}

TEST_CASE("history csv") {
    std::vector<EpochStats> h{{1, 1.5, 0.25, 1.25, 0.5}, {2, 0.75, 0.5, std::nan(""), std::nan("")}};
    std::ostringstream out;
    write_history_csv(out, h);
    const std::string s = out.str();
    CHECK(s.rfind("epoch,train_loss,train_acc,val_loss,val_acc\n", 0) == 0);
    CHECK(s.find("1,1.5,0.25,1.25,0.5\n") != std::string::npos);
}
