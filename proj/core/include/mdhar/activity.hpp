#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

namespace mdhar {

/// The nine recognised activity classes. The underscore-free names are the
/// stable identifiers used in files; the numeric value is the one-hot index.
enum class ActivityClass : int {
  BendDown0 = 0,
  SitDown0,
  StandUp0,
  WalkBack0,
  WalkBackM30,
  WalkBackP30,
  WalkForward0,
  WalkForwardP30,
  WalkForwardM30,
};

inline constexpr std::size_t kNumClasses = 9;

inline constexpr std::array<ActivityClass, kNumClasses> kAllClasses = {
    ActivityClass::BendDown0,    ActivityClass::SitDown0,
    ActivityClass::StandUp0,     ActivityClass::WalkBack0,
    ActivityClass::WalkBackM30,  ActivityClass::WalkBackP30,
    ActivityClass::WalkForward0, ActivityClass::WalkForwardP30,
    ActivityClass::WalkForwardM30,
};

/// Physical motion independent of the observation angle.
enum class MotionKind { BendDown, SitDown, StandUp, WalkBack, WalkForward };

MotionKind motion_kind(ActivityClass c);

/// Angle offset from array broadside in degrees: 0, +30 or -30.
double angle_offset_deg(ActivityClass c);

/// Class for a motion observed at a broadside offset. Returns nullopt for
/// combinations outside the nine classes (e.g. sitting at +30 degrees).
std::optional<ActivityClass> classify(MotionKind kind, double offset_deg);

std::size_t class_index(ActivityClass c);
ActivityClass class_from_index(std::size_t index);

std::string_view class_name(ActivityClass c);
std::optional<ActivityClass> parse_class(std::string_view name);

/// Human-readable label in confusion-matrix style, e.g. "Class-4 Walk Back (0°)".
std::string class_label(ActivityClass c);

}  // namespace mdhar
