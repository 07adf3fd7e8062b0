#include "comphy/attributes.hpp"

namespace comphy {

std::string_view to_string(Color c) {
    switch (c) {
        case Color::Gray: return "gray";
        case Color::Red: return "red";
        case Color::Blue: return "blue";
        case Color::Green: return "green";
        case Color::Brown: return "brown";
        case Color::Purple: return "purple";
        case Color::Cyan: return "cyan";
        case Color::Yellow: return "yellow";
    }
    return "?";
}

std::string_view to_string(Shape s) {
    switch (s) {
        case Shape::Cube: return "cube";
        case Shape::Sphere: return "sphere";
        case Shape::Cylinder: return "cylinder";
    }
    return "?";
}

std::string_view plural(Shape s) {
    switch (s) {
        case Shape::Cube: return "cubes";
        case Shape::Sphere: return "spheres";
        case Shape::Cylinder: return "cylinders";
    }
    return "?";
}

std::string_view to_string(Material m) {
    return m == Material::Metal ? "metal" : "rubber";
}

std::optional<Color> parse_color(std::string_view word) {
    for (Color c : kColors)
        if (to_string(c) == word) return c;
    return std::nullopt;
}

std::optional<Shape> parse_shape(std::string_view word) {
    for (Shape s : kShapes)
        if (to_string(s) == word) return s;
    return std::nullopt;
}

std::optional<Shape> parse_shape_plural(std::string_view word) {
    for (Shape s : kShapes)
        if (plural(s) == word) return s;
    return std::nullopt;
}

std::optional<Material> parse_material(std::string_view word) {
    for (Material m : kMaterials)
        if (to_string(m) == word) return m;
    return std::nullopt;
}

}  // namespace comphy
