#include "hmc/data/labels.hpp"

#include <algorithm>
#include <cctype>

#include "hmc/core/error.hpp"

namespace hmc::data {

std::string_view to_string(SubtypeLabel label) {
  switch (label) {
    case SubtypeLabel::triple_negative: return "TN";
    case SubtypeLabel::luminal: return "Luminal";
    case SubtypeLabel::her2_enriched: return "HER2";
  }
  return "?";
}

SubtypeLabel parse_subtype(std::string_view text) {
  for (SubtypeLabel l : kSubtypes)
    if (to_string(l) == text) return l;
  throw ValidationError("unknown subtype label '" + std::string(text) + "' (expected TN, Luminal or HER2)");
}

SubtypeLabel subtype_at(std::size_t index) {
  if (index >= kNumSubtypes) throw ValidationError("subtype index out of range");
  return kSubtypes[index];
}

std::string_view to_string(View view) {
  switch (view) {
    case View::cc: return "CC";
    case View::mlo: return "MLO";
    case View::unknown: return "unknown";
  }
  return "unknown";
}

View parse_view(std::string_view text) {
  std::string upper(text);
  std::transform(upper.begin(), upper.end(), upper.begin(), [](unsigned char c) { return std::toupper(c); });
  if (upper == "CC") return View::cc;
  if (upper == "MLO") return View::mlo;
  if (upper.empty() || upper == "UNKNOWN") return View::unknown;
  throw ValidationError("unknown view '" + std::string(text) + "' (expected CC, MLO or unknown)");
}

}  // namespace hmc::data
