#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

namespace swarman {

/// Gesture classes, in classifier output order.
enum class Emotion : std::uint8_t { Happy, Sad, Angry, Confused, Neutral };

inline constexpr std::size_t kEmotionCount = 5;

inline constexpr std::array<Emotion, kEmotionCount> kAllEmotions = {
    Emotion::Happy, Emotion::Sad, Emotion::Angry, Emotion::Confused, Emotion::Neutral,
};

struct Rgb {
    std::uint8_t r = 0;
    std::uint8_t g = 0;
    std::uint8_t b = 0;

    friend bool operator==(const Rgb&, const Rgb&) = default;
};

std::string_view emotion_name(Emotion e);

/// Throws ValidationError for anything but the five class names.
Emotion emotion_from_name(std::string_view name);

/// Light-ring color shown by the swarm for an emotion.
Rgb emotion_color(Emotion e);

}  // namespace swarman
