#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

namespace comphy {

enum class Color { Gray, Red, Blue, Green, Brown, Purple, Cyan, Yellow };
enum class Shape { Cube, Sphere, Cylinder };
enum class Material { Metal, Rubber };

inline constexpr std::array kColors{Color::Gray,  Color::Red,    Color::Blue, Color::Green,
                                    Color::Brown, Color::Purple, Color::Cyan, Color::Yellow};
inline constexpr std::array kShapes{Shape::Cube, Shape::Sphere, Shape::Cylinder};
inline constexpr std::array kMaterials{Material::Metal, Material::Rubber};

struct StaticAttrs {
    Color color = Color::Gray;
    Shape shape = Shape::Cube;
    Material material = Material::Rubber;
    constexpr bool operator==(const StaticAttrs&) const = default;
};

std::string_view to_string(Color c);
std::string_view to_string(Shape s);
std::string_view to_string(Material m);
/// Plural noun for a shape ("cubes").
std::string_view plural(Shape s);

std::optional<Color> parse_color(std::string_view word);
std::optional<Shape> parse_shape(std::string_view word);
std::optional<Shape> parse_shape_plural(std::string_view word);
std::optional<Material> parse_material(std::string_view word);

}  // namespace comphy
