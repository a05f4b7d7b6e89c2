#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>

#include "json.hpp"
#include "swarman/apf_nav.hpp"
#include "swarman/assignment.hpp"
#include "swarman/config_io.hpp"
#include "swarman/errors.hpp"
#include "swarman/gesture_lstm.hpp"
#include "swarman/pose_model.hpp"
#include "swarman/swarm_sim.hpp"
#include "swarman/synthetic_gestures.hpp"

namespace py = pybind11;
using namespace swarman;
using nlohmann::json;

namespace {

using Points = Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>;

std::vector<Vec3> to_points(const Points& m) {
    std::vector<Vec3> out(static_cast<std::size_t>(m.rows()));
    for (Eigen::Index i = 0; i < m.rows(); ++i) out[static_cast<std::size_t>(i)] = m.row(i).transpose();
    return out;
}

Points from_points(const LandmarkPositions& p) {
    Points m(kLandmarkCount, 3);
    for (std::size_t i = 0; i < kLandmarkCount; ++i) m.row(static_cast<Eigen::Index>(i)) = p[i].transpose();
    return m;
}

LandmarkFrame to_frame(double t, const Points& m) {
    if (m.rows() != static_cast<Eigen::Index>(kLandmarkCount)) {
        throw ValidationError("a frame needs " + std::to_string(kLandmarkCount) + " landmark rows");
    }
    LandmarkFrame f;
    f.t = t;
    for (std::size_t i = 0; i < kLandmarkCount; ++i) f.landmarks[i] = m.row(static_cast<Eigen::Index>(i)).transpose();
    return f;
}

json parse_or_empty(const std::string& text) { return text.empty() ? json::object() : json::parse(text); }

py::dict assignment_dict(const Assignment& a) {
    py::list pairs;
    for (const auto& p : a.pairs) pairs.append(py::make_tuple(p.target, p.drone));
    py::dict d;
    d["pairs"] = pairs;
    d["total_cost"] = a.total_cost;
    return d;
}

GestureDataset to_dataset(py::array_t<double, py::array::c_style | py::array::forcecast> x,
                          const std::vector<int>& y) {
    if (x.ndim() != 3 || x.shape(1) != static_cast<py::ssize_t>(kSequenceLength) ||
        x.shape(2) != static_cast<py::ssize_t>(kFeatureCount)) {
        throw ValidationError("expected an (N, 30, 27) array");
    }
    if (!y.empty() && y.size() != static_cast<std::size_t>(x.shape(0))) throw ValidationError("label count mismatch");
    auto r = x.unchecked<3>();
    GestureDataset out(static_cast<std::size_t>(x.shape(0)));
    for (py::ssize_t n = 0; n < x.shape(0); ++n) {
        auto& s = out[static_cast<std::size_t>(n)];
        for (py::ssize_t t = 0; t < x.shape(1); ++t) {
            for (py::ssize_t j = 0; j < x.shape(2); ++j) s.frames(t, j) = r(n, t, j);
        }
        if (!y.empty()) {
            const int label = y[static_cast<std::size_t>(n)];
            if (label < 0 || label >= static_cast<int>(kEmotionCount)) throw ValidationError("label out of range");
            s.label = kAllEmotions[static_cast<std::size_t>(label)];
        }
    }
    return out;
}

py::array_t<double> sequences_array(const GestureDataset& d) {
    py::array_t<double> x({d.size(), kSequenceLength, kFeatureCount});
    auto w = x.mutable_unchecked<3>();
    for (std::size_t n = 0; n < d.size(); ++n) {
        for (std::size_t t = 0; t < kSequenceLength; ++t) {
            for (std::size_t j = 0; j < kFeatureCount; ++j) {
                w(n, t, j) = d[n].frames(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(j));
            }
        }
    }
    return x;
}

}  // namespace

PYBIND11_MODULE(_swarman, m) {
    m.doc() = "Drone-swarm avatar core: formations, assignment, APF steering, simulation, gesture LSTM";

    py::register_exception<SchemaError>(m, "SchemaError", PyExc_ValueError);
    py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
    py::register_exception<SimulationError>(m, "SimulationError", PyExc_RuntimeError);

    py::list names, emotions;
    for (Landmark l : kAllLandmarks) names.append(std::string(landmark_name(l)));
    for (Emotion e : kAllEmotions) emotions.append(std::string(emotion_name(e)));
    m.attr("LANDMARKS") = py::tuple(names);
    m.attr("EMOTIONS") = py::tuple(emotions);

    m.def(
        "build_formation",
        [](const Points& frame, const std::string& skeleton_json) {
            const SkeletonConfig sk = skeleton_config_from_json(parse_or_empty(skeleton_json));
            return from_points(build_formation(to_frame(0.0, frame), sk.tree, sk.head_anchor, sk.axis_map).points);
        },
        py::arg("frame"), py::arg("skeleton_json") = "");

    m.def(
        "greedy_assign",
        [](const Points& t, const Points& d) { return assignment_dict(greedy_assign(to_points(t), to_points(d))); },
        py::arg("targets"), py::arg("drones"));
    m.def(
        "optimal_assign",
        [](const Points& t, const Points& d) { return assignment_dict(optimal_assign(to_points(t), to_points(d))); },
        py::arg("targets"), py::arg("drones"));

    m.def(
        "total_force",
        [](std::size_t i, const Points& positions, const Vec3& target, const std::string& apf_json) {
            const auto pos = to_points(positions);
            if (i >= pos.size()) throw ValidationError("drone index out of range");
            return Vec3(total_force(i, pos, target, apf_params_from_json(parse_or_empty(apf_json))));
        },
        py::arg("index"), py::arg("positions"), py::arg("target"), py::arg("apf_json") = "");
    m.def(
        "total_potential",
        [](std::size_t i, const Points& positions, const Vec3& target, const std::string& apf_json) {
            const auto pos = to_points(positions);
            if (i >= pos.size()) throw ValidationError("drone index out of range");
            return total_potential(i, pos, target, apf_params_from_json(parse_or_empty(apf_json)));
        },
        py::arg("index"), py::arg("positions"), py::arg("target"), py::arg("apf_json") = "");

    m.def(
        "random_takeoff_grid",
        [](const Points& formation, std::uint64_t seed) {
            FormationTargets f;
            const auto pts = to_points(formation);
            if (pts.size() != kLandmarkCount) throw ValidationError("formation needs 9 points");
            std::copy(pts.begin(), pts.end(), f.points.begin());
            const auto grid = random_takeoff_grid(f, seed);
            Points out(static_cast<Eigen::Index>(grid.size()), 3);
            for (std::size_t i = 0; i < grid.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = grid[i].transpose();
            return out;
        },
        py::arg("formation"), py::arg("seed"));

    m.def(
        "run_scenario",
        [](const std::vector<double>& times, const std::vector<Points>& frames, const Points& initial,
           const std::string& skeleton_json, const std::string& sim_json, const std::string& apf_json) {
            if (times.size() != frames.size()) throw ValidationError("times and frames differ in length");
            std::vector<LandmarkFrame> stream;
            for (std::size_t k = 0; k < frames.size(); ++k) stream.push_back(to_frame(times[k], frames[k]));
            const SkeletonConfig sk = skeleton_config_from_json(parse_or_empty(skeleton_json));
            const SimConfig sim = sim_config_from_json(parse_or_empty(sim_json));
            const ApfParams apf = apf_params_from_json(parse_or_empty(apf_json));
            const auto init = to_points(initial);
            ScenarioResult r;
            {
                py::gil_scoped_release release;
                r = run_scenario(stream, sk, sim, apf, init);
            }
            const std::size_t K = r.log.states.size(), n = init.size();
            py::array_t<double> t(K), pos({K, n, std::size_t{3}}), vel({K, n, std::size_t{3}});
            auto tw = t.mutable_unchecked<1>();
            auto pw = pos.mutable_unchecked<3>();
            auto vw = vel.mutable_unchecked<3>();
            for (std::size_t k = 0; k < K; ++k) {
                tw(k) = r.log.states[k].t;
                for (std::size_t i = 0; i < n; ++i) {
                    for (int c = 0; c < 3; ++c) {
                        pw(k, i, c) = r.log.states[k].drones[i].position[c];
                        vw(k, i, c) = r.log.states[k].drones[i].velocity[c];
                    }
                }
            }
            py::dict out;
            out["t"] = t;
            out["positions"] = pos;
            out["velocities"] = vel;
            out["assignment"] = assignment_dict(r.log.assignment);
            out["metrics_json"] = to_json(r.metrics).dump();
            return out;
        },
        py::arg("times"), py::arg("frames"), py::arg("initial_positions"), py::arg("skeleton_json") = "",
        py::arg("sim_json") = "", py::arg("apf_json") = "");

    m.def(
        "emotion_color",
        [](const std::string& label) {
            const Rgb c = emotion_color(emotion_from_name(label));
            return py::make_tuple(c.r, c.g, c.b);
        },
        py::arg("label"));

    m.def(
        "generate_synthetic_dataset",
        [](std::size_t n_per_class, double noise, std::uint64_t seed) {
            const GestureDataset d = generate_synthetic_dataset(n_per_class, noise, seed);
            std::vector<int> y;
            for (const auto& s : d) y.push_back(static_cast<int>(*s.label));
            return py::make_tuple(sequences_array(d), py::array_t<int>(static_cast<py::ssize_t>(y.size()), y.data()));
        },
        py::arg("n_per_class"), py::arg("noise_level") = kDefaultNoiseLevel, py::arg("seed") = 0);

    py::class_<LstmModel>(m, "LstmModel")
        .def_static("initialized", &LstmModel::initialized, py::arg("input_size") = kFeatureCount,
                    py::arg("hidden_sizes") = std::vector<std::size_t>{64, 32},
                    py::arg("num_classes") = kEmotionCount, py::arg("seed") = 0)
        .def_static("zeros", &LstmModel::zeros, py::arg("input_size") = kFeatureCount,
                    py::arg("hidden_sizes") = std::vector<std::size_t>{64, 32},
                    py::arg("num_classes") = kEmotionCount)
        .def_static("load", &load_model, py::arg("path"))
        .def("save", [](const LstmModel& model, const std::string& path) { save_model(model, path); }, py::arg("path"))
        .def_property_readonly("hidden_sizes", &LstmModel::hidden_sizes)
        .def_property_readonly("parameter_count", &LstmModel::parameter_count)
        .def("predict_proba",
             [](const LstmModel& model, py::array_t<double, py::array::c_style | py::array::forcecast> x) {
                 const GestureDataset d = to_dataset(std::move(x), {});
                 Eigen::MatrixXd p;
                 {
                     py::gil_scoped_release release;
                     p = forward_batch(model, d).transpose();
                 }
                 return p;
             },
             py::arg("x"));

    m.def(
        "train",
        [](const LstmModel& model, py::array_t<double, py::array::c_style | py::array::forcecast> x,
           const std::vector<int>& y, const std::string& train_json) {
            const TrainConfig cfg = train_config_from_json(parse_or_empty(train_json));
            const GestureDataset d = to_dataset(std::move(x), y);
            TrainResult r;
            {
                py::gil_scoped_release release;
                r = train(model, d, cfg);
            }
            py::list history;
            for (const auto& e : r.history) {
                py::dict h;
                h["epoch"] = e.epoch;
                h["train_loss"] = e.train_loss;
                h["train_acc"] = e.train_acc;
                h["val_loss"] = e.val_loss;
                h["val_acc"] = e.val_acc;
                history.append(h);
            }
            return py::make_tuple(r.model, history);
        },
        py::arg("model"), py::arg("x"), py::arg("y"), py::arg("train_json") = "");
}
