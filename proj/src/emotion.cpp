#include "swarman/emotion.hpp"

#include "swarman/errors.hpp"

namespace swarman {

namespace {

constexpr std::array<std::string_view, kEmotionCount> kNames = {
    "happy", "sad", "angry", "confused", "neutral",
};

}  // namespace

std::string_view emotion_name(Emotion e) { return kNames[static_cast<std::size_t>(e)]; }

Emotion emotion_from_name(std::string_view name) {
    for (std::size_t i = 0; i < kEmotionCount; ++i) {
        if (kNames[i] == name) return kAllEmotions[i];
    }
    throw ValidationError("unknown emotion label \"" + std::string(name) + "\"");
}

Rgb emotion_color(Emotion e) {
    switch (e) {
        case Emotion::Happy: return {0, 255, 0};
        case Emotion::Sad: return {0, 0, 255};
        case Emotion::Angry: return {255, 0, 0};
        case Emotion::Confused: return {255, 255, 0};
        case Emotion::Neutral: return {255, 255, 255};
    }
    throw ValidationError("invalid emotion value");
}

}  // namespace swarman
