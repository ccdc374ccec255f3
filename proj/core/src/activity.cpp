#include "mdhar/activity.hpp"

#include <cmath>
#include <stdexcept>

namespace mdhar {
namespace {

struct ClassInfo {
  ActivityClass cls;
  std::string_view name;
  MotionKind kind;
  double offset;
  std::string_view title;
};

constexpr std::array<ClassInfo, kNumClasses> kInfo = {{
    {ActivityClass::BendDown0, "BendDown0", MotionKind::BendDown, 0.0, "Bend Down"},
    {ActivityClass::SitDown0, "SitDown0", MotionKind::SitDown, 0.0, "Sit Down"},
    {ActivityClass::StandUp0, "StandUp0", MotionKind::StandUp, 0.0, "Stand Up"},
    {ActivityClass::WalkBack0, "WalkBack0", MotionKind::WalkBack, 0.0, "Walk Back"},
    {ActivityClass::WalkBackM30, "WalkBackM30", MotionKind::WalkBack, -30.0, "Walk Back"},
    {ActivityClass::WalkBackP30, "WalkBackP30", MotionKind::WalkBack, 30.0, "Walk Back"},
    {ActivityClass::WalkForward0, "WalkForward0", MotionKind::WalkForward, 0.0, "Walk Forward"},
    {ActivityClass::WalkForwardP30, "WalkForwardP30", MotionKind::WalkForward, 30.0,
     "Walk Forward"},
    {ActivityClass::WalkForwardM30, "WalkForwardM30", MotionKind::WalkForward, -30.0,
     "Walk Forward"},
}};

const ClassInfo& info(ActivityClass c) { return kInfo.at(class_index(c)); }

}  // namespace

std::size_t class_index(ActivityClass c) { return static_cast<std::size_t>(c); }

ActivityClass class_from_index(std::size_t index) {
  if (index >= kNumClasses) {
    throw std::invalid_argument("class index out of range: " + std::to_string(index));
  }
  return static_cast<ActivityClass>(index);
}

MotionKind motion_kind(ActivityClass c) { return info(c).kind; }
double angle_offset_deg(ActivityClass c) { return info(c).offset; }
std::string_view class_name(ActivityClass c) { return info(c).name; }

std::optional<ActivityClass> classify(MotionKind kind, double offset_deg) {
  for (const auto& i : kInfo) {
    if (i.kind == kind && std::abs(i.offset - offset_deg) < 1e-6) return i.cls;
  }
  return std::nullopt;
}

std::optional<ActivityClass> parse_class(std::string_view name) {
  for (const auto& i : kInfo) {
    if (i.name == name) return i.cls;
  }
  return std::nullopt;
}

std::string class_label(ActivityClass c) {
  const auto& i = info(c);
  std::string angle = i.offset == 0.0 ? "0" : (i.offset > 0 ? "+30" : "-30");
  return "Class-" + std::to_string(class_index(c) + 1) + " " + std::string(i.title) + " (" +
         angle + "\xC2\xB0)";
}

}  // namespace mdhar
