#include "commands.hpp"

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "swarman/assignment.hpp"
#include "swarman/config_io.hpp"
#include "swarman/errors.hpp"
#include "swarman/format.hpp"
#include "swarman/gesture_lstm.hpp"
#include "swarman/swarm_sim.hpp"
#include "swarman/synthetic_gestures.hpp"

namespace swarman::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

/// Failure attributable to the invocation or its inputs rather than the run.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CommonFlags {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
};

/// Scenario JSON with flag overrides applied and relative paths resolved
/// against the config file's directory.
struct Scenario {
    json doc = json::object();
    fs::path base = fs::current_path();

    bool has(const char* key) const { return doc.contains(key) && !doc.at(key).is_null(); }

    fs::path path(const char* key) const {
        fs::path p = doc.at(key).get<std::string>();
        return (p.is_absolute() ? p : base / p).lexically_normal();
    }

    std::uint64_t seed() const {
        if (!has("seed")) throw UsageError("a seed is required (config \"seed\" or --seed)");
        return doc.at("seed").get<std::uint64_t>();
    }

    json section(const char* key) const { return has(key) ? doc.at(key) : json::object(); }
};

Scenario load_scenario(const CommonFlags& flags) {
    Scenario sc;
    if (!flags.config.empty()) {
        if (!fs::exists(flags.config)) throw UsageError("config file not found: " + flags.config);
        sc.doc = read_json_file(flags.config);
        if (!sc.doc.is_object()) throw UsageError("config must be a JSON object");
        sc.base = fs::absolute(flags.config).parent_path();
    }
    if (flags.seed) sc.doc["seed"] = *flags.seed;
    if (!flags.out.empty()) sc.doc["out"] = fs::absolute(flags.out).string();
    return sc;
}

void set_path(Scenario& sc, const char* key, const std::string& flag_value) {
    if (!flag_value.empty()) sc.doc[key] = fs::absolute(flag_value).string();
}

fs::path require_file(const Scenario& sc, const char* key) {
    if (!sc.has(key)) throw UsageError(std::string("missing \"") + key + "\" path");
    fs::path p = sc.path(key);
    if (!fs::is_regular_file(p)) throw UsageError(std::string(key) + " file not found: " + p.string());
    return p;
}

SkeletonConfig skeleton_of(const Scenario& sc) {
    if (!sc.has("skeleton")) return SkeletonConfig{};
    const json& s = sc.doc.at("skeleton");
    if (s.is_string()) return skeleton_config_from_json(read_json_file(require_file(sc, "skeleton")));
    return skeleton_config_from_json(s);
}

/// Fresh run directory <out>/<command>-<UTC timestamp>[-n].
fs::path make_run_dir(const Scenario& sc, const std::string& command) {
    const fs::path root = sc.has("out") ? sc.path("out") : fs::path("runs");
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm utc{};
    gmtime_r(&now, &utc);
    std::ostringstream stamp;
    stamp << command << '-' << std::put_time(&utc, "%Y%m%dT%H%M%SZ");
    fs::create_directories(root);
    fs::path dir = root / stamp.str();
    for (int k = 1; fs::exists(dir); ++k) dir = root / (stamp.str() + "-" + std::to_string(k));
    fs::create_directory(dir);
    return dir;
}

void write_text(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    out << text;
}

std::string dump_config(const Scenario& sc, json resolved) {
    resolved["config_base"] = sc.base.string();
    return resolved.dump(2) + "\n";
}

json assignment_json(const Assignment& a) {
    json pairs = json::array();
    for (const auto& p : a.pairs) pairs.push_back({{"target", p.target}, {"drone", p.drone}});
    return {{"pairs", pairs}, {"total_cost", a.total_cost}};
}

std::vector<Emotion> parse_labels(const std::vector<std::string>& names) {
    std::vector<Emotion> out;
    for (const auto& n : names) out.push_back(emotion_from_name(n));
    return out;
}

std::string labels_csv(const std::vector<WindowLabel>& labels) {
    std::ostringstream os;
    os << "t,label,confidence\n";
    for (const auto& w : labels) {
        os << format_double(w.t) << ',' << emotion_name(w.result.label) << ','
           << format_double(w.result.confidence) << '\n';
    }
    return os.str();
}

// --- commands -----------------------------------------------------------

int cmd_replay(const CommonFlags& flags, const std::string& stream_flag, const std::string& model_flag,
               std::size_t stride, std::ostream& out) {
    Scenario sc = load_scenario(flags);
    set_path(sc, "stream", stream_flag);
    set_path(sc, "model", model_flag);

    // Everything is read and computed before the run directory exists, so a
    // failure leaves no partial outputs.
    const fs::path stream_path = require_file(sc, "stream");
    std::optional<fs::path> model_path;
    if (sc.has("model")) model_path = require_file(sc, "model");
    const SkeletonConfig skeleton = skeleton_of(sc);
    const SimConfig sim = sim_config_from_json(sc.section("sim"));
    const ApfParams apf = apf_params_from_json(sc.section("apf"));
    if (sc.has("window_stride")) stride = sc.doc.at("window_stride").get<std::size_t>();

    const auto stream = load_landmark_stream(stream_path);
    if (stream.empty()) throw ValidationError("landmark stream is empty");

    std::vector<Vec3> initial;
    if (sc.has("initial_positions")) {
        initial = positions_from_json(sc.doc.at("initial_positions"));
    } else {
        const auto first = build_formation(stream.front(), skeleton.tree, skeleton.head_anchor, skeleton.axis_map);
        initial = random_takeoff_grid(first, sc.seed());
    }

    std::vector<ColorEvent> colors;
    std::vector<WindowLabel> labels;
    if (model_path) {
        const LstmModel model = load_model(*model_path);
        labels = classify_stream(model, stream, stride);
        for (const auto& w : labels) colors.push_back({w.t, w.result.label});
    }

    const ScenarioResult result = run_scenario(stream, skeleton, sim, apf, initial, colors);

    std::ostringstream csv;
    write_trajectory_csv(csv, result.log);
    json metrics = to_json(result.metrics);
    metrics["assignment"] = assignment_json(result.log.assignment);

    json resolved = sc.doc;
    resolved["stream"] = stream_path.string();
    resolved["skeleton"] = to_json(skeleton);
    resolved["sim"] = to_json(sim);
    resolved["apf"] = to_json(apf);
    json init = json::array();
    for (const auto& p : initial) init.push_back(vec3_to_json(p));
    resolved["initial_positions"] = init;
    resolved["window_stride"] = stride;

    const fs::path dir = make_run_dir(sc, "replay");
    write_text(dir / "trajectory.csv", csv.str());
    write_text(dir / "metrics.json", metrics.dump(2) + "\n");
    if (model_path) write_text(dir / "labels.csv", labels_csv(labels));
    write_text(dir / "config.json", dump_config(sc, resolved));
    out << dir.string() << '\n';
    return kOk;
}

int cmd_assign(const std::string& targets_file, const std::string& drones_file, bool optimal, std::ostream& out) {
    for (const auto& f : {targets_file, drones_file}) {
        if (!fs::is_regular_file(f)) throw UsageError("file not found: " + f);
    }
    const auto targets = positions_from_json(read_json_file(targets_file));
    const auto drones = positions_from_json(read_json_file(drones_file));
    const Assignment greedy = greedy_assign(targets, drones);
    json j = assignment_json(greedy);
    if (optimal) {
        const Assignment best = optimal_assign(targets, drones);
        j["optimal"] = assignment_json(best);
        j["cost_ratio"] = best.total_cost > 0.0 ? greedy.total_cost / best.total_cost : 1.0;
    }
    out << j.dump(2) << '\n';
    return kOk;
}

int cmd_train(const CommonFlags& flags, const std::string& data_flag, std::optional<std::size_t> epochs,
              std::ostream& out) {
    Scenario sc = load_scenario(flags);
    set_path(sc, "dataset", data_flag);
    TrainConfig tc = train_config_from_json(sc.section("train"));
    if (epochs) tc.epochs = *epochs;
    tc.seed = sc.seed();
    tc.validate();

    std::vector<std::size_t> hidden{64, 32};
    if (sc.has("hidden_sizes")) hidden = sc.doc.at("hidden_sizes").get<std::vector<std::size_t>>();

    GestureDataset data;
    if (sc.has("dataset")) {
        data = load_dataset(require_file(sc, "dataset"));
    } else {
        const json g = sc.section("gen_data");
        data = generate_synthetic_dataset(g.value("n_per_class", std::size_t{120}),
                                          g.value("noise_level", kDefaultNoiseLevel), tc.seed);
    }

    const LstmModel init = LstmModel::initialized(kFeatureCount, hidden, kEmotionCount, tc.seed);
    const TrainResult result = train(init, data, tc);

    std::ostringstream hist;
    write_history_csv(hist, result.history);
    json resolved = sc.doc;
    resolved["train"] = to_json(tc);
    resolved["hidden_sizes"] = hidden;

    const fs::path dir = make_run_dir(sc, "train");
    write_text(dir / "model.json", model_to_json(result.model) + "\n");
    write_text(dir / "history.csv", hist.str());
    write_text(dir / "config.json", dump_config(sc, resolved));
    const EpochStats& last = result.history.back();
    out << dir.string() << '\n'
        << "final epoch " << last.epoch << ": train_loss=" << format_double(last.train_loss)
        << " train_acc=" << format_double(last.train_acc) << " val_loss=" << format_double(last.val_loss)
        << " val_acc=" << format_double(last.val_acc) << '\n';
    return kOk;
}

int cmd_classify(const CommonFlags& flags, const std::string& stream_flag, const std::string& model_flag,
                 std::size_t stride, std::ostream& out) {
    Scenario sc = load_scenario(flags);
    set_path(sc, "stream", stream_flag);
    set_path(sc, "model", model_flag);
    if (sc.has("window_stride")) stride = sc.doc.at("window_stride").get<std::size_t>();
    const fs::path stream_path = require_file(sc, "stream");
    const fs::path model_path = require_file(sc, "model");
    const LstmModel model = load_model(model_path);
    const auto stream = load_landmark_stream(stream_path);
    const auto labels = classify_stream(model, stream, stride);

    json resolved = sc.doc;
    resolved["stream"] = stream_path.string();
    resolved["model"] = model_path.string();
    resolved["window_stride"] = stride;
    const fs::path dir = make_run_dir(sc, "classify");
    write_text(dir / "labels.csv", labels_csv(labels));
    write_text(dir / "config.json", dump_config(sc, resolved));
    out << dir.string() << '\n';
    return kOk;
}

int cmd_gen_data(const CommonFlags& flags, std::optional<std::size_t> n_per_class, std::optional<double> noise,
                 const std::vector<std::string>& clip_labels, std::ostream& out) {
    Scenario sc = load_scenario(flags);
    json g = sc.section("gen_data");
    if (n_per_class) g["n_per_class"] = *n_per_class;
    if (noise) g["noise_level"] = *noise;
    if (!clip_labels.empty()) g["clips"] = clip_labels;
    const std::size_t n = g.value("n_per_class", std::size_t{120});
    const double level = g.value("noise_level", kDefaultNoiseLevel);
    const auto clips = parse_labels(g.value("clips", std::vector<std::string>{}));
    const std::uint64_t seed = sc.seed();

    std::ostringstream data;
    write_dataset(data, generate_synthetic_dataset(n, level, seed));
    std::ostringstream stream;
    if (!clips.empty()) write_landmark_stream(stream, synthesize_stream(clips, level, seed));

    json resolved = sc.doc;
    g["n_per_class"] = n;
    g["noise_level"] = level;
    resolved["gen_data"] = g;
    const fs::path dir = make_run_dir(sc, "gen-data");
    write_text(dir / "dataset.jsonl", data.str());
    if (!clips.empty()) write_text(dir / "stream.jsonl", stream.str());
    write_text(dir / "config.json", dump_config(sc, resolved));
    out << dir.string() << '\n';
    return kOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Drone-swarm avatar simulator: formation replay, assignment and gesture classification"};
    app.require_subcommand(1);

    CommonFlags flags;
    std::uint64_t seed_value = 0;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", flags.config, "Scenario JSON");
        sub->add_option("--out", flags.out, "Output root directory");
        sub->add_option("--seed", seed_value, "RNG seed");
    };

    std::string stream_flag, model_flag, data_flag;
    std::size_t stride = 1;

    auto* replay = app.add_subcommand("replay", "Fly the swarm along a recorded landmark stream");
    add_common(replay);
    replay->add_option("--stream", stream_flag, "Landmark stream JSONL");
    replay->add_option("--model", model_flag, "Gesture model JSON; colors the swarm by classified emotion");
    replay->add_option("--stride", stride, "Classification window stride in frames")->check(CLI::PositiveNumber);

    std::string targets_file, drones_file;
    bool optimal = false;
    auto* assign = app.add_subcommand("assign", "Greedy drone-to-target assignment");
    assign->add_option("targets", targets_file, "JSON array of target positions")->required();
    assign->add_option("drones", drones_file, "JSON array of drone positions")->required();
    assign->add_flag("--optimal", optimal, "Also run the exhaustive optimum (n <= 9)");

    std::optional<std::size_t> epochs;
    auto* train_cmd = app.add_subcommand("train", "Train the gesture classifier");
    add_common(train_cmd);
    train_cmd->add_option("--data", data_flag, "Dataset JSONL (synthetic data is generated if absent)");
    train_cmd->add_option("--epochs", epochs, "Override train.epochs");

    auto* classify_cmd = app.add_subcommand("classify", "Sliding-window gesture labels for a stream");
    add_common(classify_cmd);
    classify_cmd->add_option("--stream", stream_flag, "Landmark stream JSONL");
    classify_cmd->add_option("--model", model_flag, "Gesture model JSON");
    classify_cmd->add_option("--stride", stride, "Window stride in frames")->check(CLI::PositiveNumber);

    std::optional<std::size_t> n_per_class;
    std::optional<double> noise;
    std::vector<std::string> clip_labels;
    auto* gen = app.add_subcommand("gen-data", "Write a synthetic labeled gesture dataset");
    add_common(gen);
    gen->add_option("--n-per-class", n_per_class, "Sequences per emotion");
    gen->add_option("--noise", noise, "Noise level");
    gen->add_option("--clip", clip_labels, "Also write a landmark stream of these clips, in order");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsageError;
    }

    auto seed_given = [&](CLI::App* sub) { return sub->count("--seed") > 0; };
    try {
        if (*replay) {
            if (seed_given(replay)) flags.seed = seed_value;
            return cmd_replay(flags, stream_flag, model_flag, stride, out);
        }
        if (*assign) return cmd_assign(targets_file, drones_file, optimal, out);
        if (*train_cmd) {
            if (seed_given(train_cmd)) flags.seed = seed_value;
            return cmd_train(flags, data_flag, epochs, out);
        }
        if (*classify_cmd) {
            if (seed_given(classify_cmd)) flags.seed = seed_value;
            return cmd_classify(flags, stream_flag, model_flag, stride, out);
        }
        if (*gen) {
            if (seed_given(gen)) flags.seed = seed_value;
            return cmd_gen_data(flags, n_per_class, noise, clip_labels, out);
        }
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return kUsageError;
    } catch (const SchemaError& e) {
        err << "error: " << e.what() << '\n';
        return kUsageError;
    } catch (const json::exception& e) {
        err << "error: bad config value: " << e.what() << '\n';
        return kUsageError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kRuntimeError;
    }
    return kUsageError;
}

}  // namespace swarman::cli
