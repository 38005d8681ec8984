#pragma once

#include <cstdint>
#include <string_view>

namespace spatter {

// Answer value for a history slot whose node or feature does not exist yet.
inline constexpr int kNull = -1;

// What a history slot holds; decides which binary questions can be asked.
enum class SlotType : std::uint8_t { Word, Tag, Label, Extension, Count };
inline constexpr int kCategoricalSlotTypes = 4;  // Word..Extension have class trees

enum class ModelKind : std::uint8_t { Tag = 0, Extension = 1, Label = 2 };
inline constexpr int kModelKinds = 3;

enum class Extension : std::uint8_t { Right = 0, Left = 1, Up = 2, Unary = 3, Root = 4 };
inline constexpr int kExtensionCount = 5;

std::string_view model_kind_name(ModelKind kind) noexcept;
std::string_view extension_name(Extension ext) noexcept;
std::string_view slot_type_name(SlotType type) noexcept;

}  // namespace spatter
