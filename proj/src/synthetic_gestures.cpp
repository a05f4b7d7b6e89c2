#include "swarman/synthetic_gestures.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "swarman/errors.hpp"

namespace swarman {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kUpperArm = 0.15;
constexpr double kForearm = 0.14;

double smoothstep(double s) {
    s = std::clamp(s, 0.0, 1.0);
    return s * s * (3.0 - 2.0 * s);
}

/// Arm pose in the image plane. `abduction` is the upper-arm angle from
/// straight down (pi/2 = horizontal outward, pi = straight up); the forearm
/// continues at abduction + bend. `reach` pushes the hand toward the camera.
struct ArmPose {
    double abduction = 0.1;
    double bend = 0.1;
    double reach = 0.0;
};

struct BodyPose {
    Vec3 head{0.0, -0.30, 0.0};
    Vec3 neck{0.0, -0.20, 0.0};
    Vec3 torso{0.0, 0.10, 0.0};
    Vec3 l_shoulder{0.11, -0.18, 0.0};
    Vec3 r_shoulder{-0.11, -0.18, 0.0};
    ArmPose left;
    ArmPose right;
};

// side = +1 for the operator's left arm (image right), -1 for the right arm.
void place_arm(const Vec3& shoulder, const ArmPose& arm, double side, Vec3& elbow, Vec3& hand) {
    const Vec3 upper(side * std::sin(arm.abduction), std::cos(arm.abduction), 0.0);
    const double fa = arm.abduction + arm.bend;
    const Vec3 fore(side * std::sin(fa), std::cos(fa), 0.0);
    elbow = shoulder + kUpperArm * upper;
    hand = elbow + kForearm * fore + Vec3(0.0, 0.0, -arm.reach);
}

BodyPose template_pose(Emotion e, double s, double amp) {
    BodyPose p;
    const double k = smoothstep(s);
    switch (e) {
        case Emotion::Happy:
            // Both arms swing up into a V above the head.
            p.left = p.right = {0.15 + k * 2.45 * amp, 0.15, 0.0};
            p.head.y() -= 0.01 * k;
            break;
        case Emotion::Sad:
            // Head drops forward, shoulders slump, hands fold together low in front.
            p.head += Vec3(0.0, 0.06 * k * amp, -0.04 * k);
            p.neck.y() += 0.02 * k;
            p.l_shoulder += Vec3(-0.01 * k, 0.02 * k, 0.0);
            p.r_shoulder += Vec3(0.01 * k, 0.02 * k, 0.0);
            p.left = p.right = {0.1, -(0.3 + 0.9 * k * amp), 0.08 * k};
            break;
        case Emotion::Angry: {
            // Elbows out, forearms raised, fists shaking.
            const double shake = 0.35 * std::sin(2.0 * kPi * 3.0 * s);
            p.left = p.right = {0.7 * amp * k + 0.1, (1.9 + shake) * k + 0.1, 0.0};
            p.l_shoulder.y() -= 0.015 * k;
            p.r_shoulder.y() -= 0.015 * k;
            break;
        }
        case Emotion::Confused:
            // Right hand up to the head, left palm out in a shrug, head tilts.
            p.right = {0.1 + 2.2 * k * amp, 0.1 + 1.9 * k, 0.0};
            p.left = {0.1 + 0.3 * k, 0.1 + 1.2 * k, 0.03 * k};
            p.l_shoulder.y() -= 0.025 * k;
            p.head.x() += 0.03 * k;
            break;
        case Emotion::Neutral:
            // Arms hang at the sides with a slight sway.
            p.left = p.right = {0.12 + 0.03 * amp * std::sin(2.0 * kPi * s), 0.1, 0.0};
            p.head.x() += 0.01 * std::sin(2.0 * kPi * s);
            break;
    }
    return p;
}

LandmarkFrame to_frame(const BodyPose& p, double t, const Vec3& center, double scale) {
    LandmarkFrame f;
    f.t = t;
    f[Landmark::Head] = p.head;
    f[Landmark::Neck] = p.neck;
    f[Landmark::Torso] = p.torso;
    f[Landmark::LShoulder] = p.l_shoulder;
    f[Landmark::RShoulder] = p.r_shoulder;
    place_arm(p.l_shoulder, p.left, 1.0, f[Landmark::LElbow], f[Landmark::LHand]);
    place_arm(p.r_shoulder, p.right, -1.0, f[Landmark::RElbow], f[Landmark::RHand]);
    for (auto& v : f.landmarks) v = center + scale * v;
    return f;
}

}  // namespace

LandmarkFrame t_pose_frame(double t) {
    BodyPose p;
    p.left = p.right = {kPi / 2.0, 0.0, 0.0};
    return to_frame(p, t, Vec3(0.5, 0.5, 0.0), 1.0);
}

std::vector<LandmarkFrame> synthesize_clip(Emotion emotion, double noise_level, std::mt19937_64& rng,
                                           double t0) {
    if (!(noise_level >= 0.0) || !std::isfinite(noise_level)) throw ValidationError("noise level must be >= 0");
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const double n = noise_level;

    const double tempo = 1.0 + 10.0 * n * unit(rng);
    const double phase = 5.0 * n * unit(rng);
    const double amp = 1.0 + 10.0 * n * unit(rng);
    const double scale = 1.0 + 10.0 * n * unit(rng);
    const Vec3 center(0.5 + 5.0 * n * unit(rng), 0.5 + 5.0 * n * unit(rng), 0.0);
    const double sigma = 0.5 * n;

    std::vector<LandmarkFrame> clip;
    clip.reserve(kSequenceLength);
    for (std::size_t i = 0; i < kSequenceLength; ++i) {
        const double s = tempo * static_cast<double>(i) / static_cast<double>(kSequenceLength - 1) + phase;
        LandmarkFrame f = to_frame(template_pose(emotion, s, amp), t0 + static_cast<double>(i) / kClipFps,
                                   center, scale);
        if (sigma > 0.0) {
            for (auto& v : f.landmarks) v += sigma * Vec3(gauss(rng), gauss(rng), gauss(rng));
        }
        clip.push_back(f);
    }
    return clip;
}

GestureDataset generate_synthetic_dataset(std::size_t n_per_class, double noise_level, std::uint64_t seed) {
    if (n_per_class < 1) throw ValidationError("n_per_class must be >= 1");
    std::mt19937_64 rng(seed);
    GestureDataset out;
    out.reserve(n_per_class * kEmotionCount);
    for (std::size_t i = 0; i < n_per_class; ++i) {
        for (Emotion e : kAllEmotions) {
            GestureSequence seq = featurize(synthesize_clip(e, noise_level, rng));
            seq.label = e;
            out.push_back(std::move(seq));
        }
    }
    return out;
}

std::vector<LandmarkFrame> synthesize_stream(const std::vector<Emotion>& emotions, double noise_level,
                                             std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<LandmarkFrame> out;
    for (std::size_t c = 0; c < emotions.size(); ++c) {
        const double t0 = static_cast<double>(c * kSequenceLength) / kClipFps;
        auto clip = synthesize_clip(emotions[c], noise_level, rng, t0);
        out.insert(out.end(), clip.begin(), clip.end());
    }
    return out;
}

}  // namespace swarman
