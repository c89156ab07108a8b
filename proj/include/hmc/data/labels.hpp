#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <string_view>

namespace hmc::data {

/// Class order is fixed everywhere: TN, Luminal, HER2.
enum class SubtypeLabel : std::size_t { triple_negative = 0, luminal = 1, her2_enriched = 2 };

inline constexpr std::size_t kNumSubtypes = 3;
inline constexpr std::array<SubtypeLabel, kNumSubtypes> kSubtypes{
    SubtypeLabel::triple_negative, SubtypeLabel::luminal, SubtypeLabel::her2_enriched};

/// Manifest spelling: "TN", "Luminal", "HER2".
std::string_view to_string(SubtypeLabel label);
SubtypeLabel parse_subtype(std::string_view text);  // throws ValidationError

inline std::size_t index_of(SubtypeLabel label) { return static_cast<std::size_t>(label); }
SubtypeLabel subtype_at(std::size_t index);

enum class View { cc, mlo, unknown };

std::string_view to_string(View view);
View parse_view(std::string_view text);

}  // namespace hmc::data
