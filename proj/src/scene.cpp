#include "eventqa/scene.hpp"

#include <algorithm>

#include "eventqa/errors.hpp"

namespace eventqa {

namespace {

constexpr std::array<std::string_view, 8> kColorNames{"gray", "red", "blue", "green",
                                                      "brown", "cyan", "purple", "yellow"};
constexpr std::array<std::string_view, 2> kMaterialNames{"metal", "rubber"};
constexpr std::array<std::string_view, 3> kShapeNames{"cube", "sphere", "cylinder"};
constexpr std::array<std::string_view, 5> kKindNames{"enter", "exit", "collision", "start", "end"};

template <typename E, std::size_t N>
std::optional<E> lookup(const std::array<std::string_view, N>& names, std::string_view s) {
    for (std::size_t i = 0; i < N; ++i)
        if (names[i] == s) return static_cast<E>(i);
    return std::nullopt;
}

}  // namespace

std::string_view to_string(Color c) { return kColorNames[static_cast<std::size_t>(c)]; }
std::string_view to_string(Material m) { return kMaterialNames[static_cast<std::size_t>(m)]; }
std::string_view to_string(Shape s) { return kShapeNames[static_cast<std::size_t>(s)]; }
std::string_view to_string(EventKind k) { return kKindNames[static_cast<std::size_t>(k)]; }

std::optional<Color> parse_color(std::string_view s) { return lookup<Color>(kColorNames, s); }
std::optional<Material> parse_material(std::string_view s) { return lookup<Material>(kMaterialNames, s); }
std::optional<Shape> parse_shape(std::string_view s) { return lookup<Shape>(kShapeNames, s); }
std::optional<EventKind> parse_event_kind(std::string_view s) { return lookup<EventKind>(kKindNames, s); }

Attribute Attribute::from_index(int i) {
    Attribute a;
    a.shape = static_cast<Shape>(i % 3);
    a.material = static_cast<Material>((i / 3) % 2);
    a.color = static_cast<Color>(i / 6);
    return a;
}

int MotionTrace::index_of(int object_id) const {
    auto it = std::find(object_ids.begin(), object_ids.end(), object_id);
    return it == object_ids.end() ? -1 : static_cast<int>(it - object_ids.begin());
}

std::span<const FrameState> MotionTrace::of(int object_id) const {
    const int k = index_of(object_id);
    if (k < 0) throw InputError("trace has no object " + std::to_string(object_id));
    return states[static_cast<std::size_t>(k)];
}

Event Event::collision(int a, int b, std::optional<int> frame) {
    if (a > b) std::swap(a, b);
    return {EventKind::Collision, frame, {a, b}};
}

bool Event::involves(int object) const {
    return std::find(participants.begin(), participants.end(), object) != participants.end();
}

EventKey event_identity(const Event& e) {
    EventKey key;
    key.kind = e.kind;
    switch (e.kind) {
        case EventKind::Start:
        case EventKind::End:
            throw InputError("start/end events have no identity key");
        case EventKind::Enter:
        case EventKind::Exit:
            if (e.participants.size() != 1) throw InputError("enter/exit needs exactly one participant");
            key.ids = {e.participants[0], -1};
            break;
        case EventKind::Collision:
            if (e.participants.size() != 2 || e.participants[0] == e.participants[1])
                throw InputError("collision needs two distinct participants");
            key.ids = {std::min(e.participants[0], e.participants[1]),
                       std::max(e.participants[0], e.participants[1])};
            break;
    }
    return key;
}

void sort_chronologically(std::vector<Event>& events) {
    std::stable_sort(events.begin(), events.end(), [](const Event& a, const Event& b) {
        if (!a.frame) return false;
        if (!b.frame) return true;
        return *a.frame < *b.frame;
    });
}

std::string describe(const Event& e) {
    std::string s{to_string(e.kind)};
    s += '(';
    for (std::size_t i = 0; i < e.participants.size(); ++i) {
        if (i) s += ',';
        s += std::to_string(e.participants[i]);
    }
    s += ")@";
    s += e.frame ? std::to_string(*e.frame) : "null";
    return s;
}

}  // namespace eventqa
