#pragma once

// Shared domain vocabulary: attributes, objects, per-frame states, events.

#include <array>
#include <cmath>
#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace eventqa {

inline constexpr int kFramesPerSecond = 25;
inline constexpr int kTotalFrames = 175;       // 7 s at 25 fps
inline constexpr int kObservedEndFrame = 124;  // frames 0..124 are shown, 125..174 held out
inline constexpr double kFrameSeconds = 1.0 / kFramesPerSecond;

enum class Color : std::uint8_t { Gray, Red, Blue, Green, Brown, Cyan, Purple, Yellow };
enum class Material : std::uint8_t { Metal, Rubber };
enum class Shape : std::uint8_t { Cube, Sphere, Cylinder };

inline constexpr std::array<Color, 8> kAllColors{Color::Gray,  Color::Red,  Color::Blue,   Color::Green,
                                                 Color::Brown, Color::Cyan, Color::Purple, Color::Yellow};
inline constexpr std::array<Material, 2> kAllMaterials{Material::Metal, Material::Rubber};
inline constexpr std::array<Shape, 3> kAllShapes{Shape::Cube, Shape::Sphere, Shape::Cylinder};
inline constexpr int kAttributeCombinations = 8 * 2 * 3;

std::string_view to_string(Color c);
std::string_view to_string(Material m);
std::string_view to_string(Shape s);
std::optional<Color> parse_color(std::string_view s);
std::optional<Material> parse_material(std::string_view s);
std::optional<Shape> parse_shape(std::string_view s);

struct Attribute {
    Color color{};
    Material material{};
    Shape shape{};

    auto operator<=>(const Attribute&) const = default;

    /// Dense index in [0, 48).
    int index() const {
        return (static_cast<int>(color) * 2 + static_cast<int>(material)) * 3 + static_cast<int>(shape);
    }
    static Attribute from_index(int i);
};

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    bool operator==(const Vec2&) const = default;
    Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    Vec2& operator+=(Vec2 o) {
        x += o.x;
        y += o.y;
        return *this;
    }
    Vec2& operator-=(Vec2 o) {
        x -= o.x;
        y -= o.y;
        return *this;
    }
    double dot(Vec2 o) const { return x * o.x + y * o.y; }
    double norm2() const { return x * x + y * y; }
    double norm() const { return std::sqrt(norm2()); }
    bool finite() const { return std::isfinite(x) && std::isfinite(y); }
};

inline Vec2 rotate(Vec2 v, double angle) {
    const double c = std::cos(angle), s = std::sin(angle);
    return {c * v.x - s * v.y, s * v.x + c * v.y};
}

inline Vec2 unit_vector(double angle) { return {std::cos(angle), std::sin(angle)}; }

/// Axis-aligned scene rectangle.
struct Bounds {
    double min_x = -5.0;
    double max_x = 5.0;
    double min_y = -5.0;
    double max_y = 5.0;

    bool operator==(const Bounds&) const = default;
    bool contains(Vec2 p) const { return p.x >= min_x && p.x <= max_x && p.y >= min_y && p.y <= max_y; }
    Bounds expanded(double margin) const {
        return {min_x - margin, max_x + margin, min_y - margin, max_y + margin};
    }
};

inline constexpr double kDefaultRadius = 0.5;

struct ObjectSpec {
    int id = 0;
    Attribute attrs;
    Vec2 init_position;
    Vec2 init_velocity;  // scene units per second
    int spawn_frame = 0; // 0 = present at video start

    bool operator==(const ObjectSpec&) const = default;
};

struct FrameState {
    Vec2 position;
    Vec2 velocity;
    bool visible = false;

    bool operator==(const FrameState&) const = default;
};

/// Per-object states over all 175 frames. `object_ids[k]` owns `states[k]`.
struct MotionTrace {
    std::vector<int> object_ids;
    std::vector<std::vector<FrameState>> states;

    static constexpr int observed_end = kObservedEndFrame;

    bool operator==(const MotionTrace&) const = default;

    /// Row index of an object id, or -1.
    int index_of(int object_id) const;
    std::span<const FrameState> of(int object_id) const;
};

enum class EventKind : std::uint8_t { Enter, Exit, Collision, Start, End };

std::string_view to_string(EventKind k);
std::optional<EventKind> parse_event_kind(std::string_view s);

struct Event {
    EventKind kind = EventKind::Start;
    std::optional<int> frame;   // nullopt only for hypothetical candidates
    std::vector<int> participants;  // sorted ascending

    bool operator==(const Event&) const = default;

    static Event enter(int object, std::optional<int> frame) { return {EventKind::Enter, frame, {object}}; }
    static Event exit(int object, std::optional<int> frame) { return {EventKind::Exit, frame, {object}}; }
    static Event collision(int a, int b, std::optional<int> frame);
    static Event start() { return {EventKind::Start, 0, {}}; }
    static Event end() { return {EventKind::End, kObservedEndFrame, {}}; }

    bool involves(int object) const;
};

/// Frame-free identity of an event: kind plus sorted participants.
struct EventKey {
    EventKind kind{};
    std::array<int, 2> ids{-1, -1};

    auto operator<=>(const EventKey&) const = default;
};

/// Throws InputError for start/end events and for malformed participant lists.
EventKey event_identity(const Event& e);

/// Sorts by frame, stable; hypothetical (null-frame) events go last.
void sort_chronologically(std::vector<Event>& events);

std::string describe(const Event& e);

}  // namespace eventqa
