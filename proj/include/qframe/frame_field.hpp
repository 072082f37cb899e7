#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <iomanip>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "qframe/cauchy.hpp"
#include "qframe/error.hpp"
#include "qframe/gauge.hpp"
#include "qframe/state.hpp"
#include "qframe/superposition.hpp"

namespace qframe {

// Frames are nodes of an append-only graph. Tree edges carry the incoming
// gauge of the child; a cyclic field closes each lineage with wrap edges from
// the last stage back to the anchor at stage 0.

enum class TopologyKind { finite, one_way, two_way, cyclic };

struct Topology {
    TopologyKind kind = TopologyKind::one_way;
    std::int64_t k = 0;  ///< stage count for finite and cyclic

    static Topology finite(std::int64_t k) {
        if (k < 1) throw DomainError("finite field needs k >= 1 stages");
        return {TopologyKind::finite, k};
    }
    static Topology one_way() { return {TopologyKind::one_way, 0}; }
    static Topology two_way() { return {TopologyKind::two_way, 0}; }
    static Topology cyclic(std::int64_t k) {
        if (k < 1) throw DomainError("cyclic field needs k >= 1");
        return {TopologyKind::cyclic, k};
    }

    std::string name() const {
        switch (kind) {
            case TopologyKind::finite: return "finite";
            case TopologyKind::one_way: return "one-way";
            case TopologyKind::two_way: return "two-way";
            case TopologyKind::cyclic: return "cyclic";
        }
        return "one-way";
    }

    static Topology parse(const std::string& name, std::int64_t k) {
        if (name == "finite") return finite(k);
        if (name == "one-way" || name == "one_way") return one_way();
        if (name == "two-way" || name == "two_way") return two_way();
        if (name == "cyclic") return cyclic(k);
        throw DomainError("unknown topology '" + name + "'");
    }
};

struct Frame {
    std::string id;
    std::int64_t stage = 0;
    GaugeTransform gauge;  ///< incoming gauge from the parent
    std::optional<std::string> parent;
};

struct WrapEdge {
    std::string from;  ///< a frame at stage k-1
    std::string to;    ///< the anchor
    GaugeTransform gauge;
};

namespace detail {

inline std::string fnv_id(const std::string& text) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << h;
    return os.str();
}

}  // namespace detail

class FrameField {
public:
    explicit FrameField(Topology t, bool ancestor_rule = true) : topology_(t), ancestor_rule_(ancestor_rule) {
        Frame a{detail::fnv_id("anchor:" + t.name() + ":" + std::to_string(t.k)), 0, GaugeTransform::identity(),
                std::nullopt};
        anchor_ = a.id;
        frames_.emplace(a.id, std::move(a));
    }

    const Topology& topology() const noexcept { return topology_; }
    bool ancestor_rule() const noexcept { return ancestor_rule_; }

    /// The ancestor-free frame of finite and one-way fields.
    std::optional<Frame> root() const {
        if (topology_.kind == TopologyKind::two_way || topology_.kind == TopologyKind::cyclic) return std::nullopt;
        return frame(anchor_);
    }

    /// Stage-0 frame every field starts from; for two-way and cyclic fields
    /// it has (or can be given) a predecessor.
    Frame anchor() const { return frame(anchor_); }

    Frame frame(const std::string& id) const {
        std::lock_guard lock(*mu_);
        return frame_unlocked(id);
    }

    bool contains(const std::string& id) const {
        std::lock_guard lock(*mu_);
        return frames_.count(id) != 0;
    }

    std::size_t size() const {
        std::lock_guard lock(*mu_);
        return frames_.size();
    }

    std::vector<Frame> frames() const {
        std::lock_guard lock(*mu_);
        std::vector<Frame> out;
        for (const auto& [id, f] : frames_) out.push_back(f);
        return out;
    }

    std::vector<WrapEdge> wraps() const {
        std::lock_guard lock(*mu_);
        return wraps_;
    }

    /// New frame one stage after `parent` with incoming gauge u. Idempotent:
    /// equal (parent, gauge fingerprint) keys return the same frame. In a
    /// cyclic field a spawn from stage k-1 closes the cycle and returns the
    /// anchor.
    Frame spawn(const std::string& parent_id, const GaugeTransform& u) {
        std::lock_guard lock(*mu_);
        const auto& parent = frame_unlocked(parent_id);
        auto next = parent.stage + 1;
        if (topology_.kind == TopologyKind::finite && next >= topology_.k)
            throw TopologyError("finite(" + std::to_string(topology_.k) + ") field has no stage " +
                                std::to_string(next));
        if (topology_.kind == TopologyKind::cyclic && next == topology_.k) {
            for (const auto& w : wraps_)
                if (w.from == parent_id && w.gauge.fingerprint() == u.fingerprint()) return frame_unlocked(anchor_);
            wraps_.push_back(WrapEdge{parent_id, anchor_, u});
            return frame_unlocked(anchor_);
        }
        auto id = detail::fnv_id(parent_id + "|" + u.fingerprint());
        auto it = frames_.find(id);
        if (it != frames_.end()) return it->second;
        Frame f{id, next, u, parent_id};
        return frames_.emplace(id, std::move(f)).first->second;
    }

    /// Predecessor of a frame. Two-way fields have no first frame: the
    /// predecessor of a parentless frame is created on demand, joined to it
    /// by the identity gauge.
    Frame parent_of(const std::string& id) {
        std::lock_guard lock(*mu_);
        auto& f = frames_.at(checked(id));
        if (f.parent) return frame_unlocked(*f.parent);
        if (topology_.kind != TopologyKind::two_way)
            throw TopologyError("frame " + id + " has no parent in a " + topology_.name() + " field");
        auto pid = detail::fnv_id("before:" + id);
        frames_.emplace(pid, Frame{pid, f.stage - 1, GaugeTransform::identity(), std::nullopt});
        f.parent = pid;
        f.gauge = GaugeTransform::identity();
        return frame_unlocked(pid);
    }

    /// True when `a` lies on the tree path above `d` (a != d).
    bool is_tree_ancestor(const std::string& a, const std::string& d) const {
        std::lock_guard lock(*mu_);
        return tree_path(a, d).has_value() && a != d;
    }

    /// Gauge accumulated from `ancestor` to `descendant`, later edges applied
    /// last. Cyclic fields may route through one wrap edge.
    GaugeTransform path_gauge(const std::string& ancestor, const std::string& descendant) const {
        std::lock_guard lock(*mu_);
        checked(ancestor);
        checked(descendant);
        if (auto g = tree_path(ancestor, descendant)) return *g;
        if (topology_.kind == TopologyKind::cyclic)
            if (auto g = wrap_path(ancestor, descendant)) return *g;
        throw PathError("frame " + descendant + " is not reachable from " + ancestor);
    }

    /// Composite gauge once around the cycle, starting and ending at `id`.
    GaugeTransform cycle_gauge(const std::string& id) const {
        std::lock_guard lock(*mu_);
        if (topology_.kind != TopologyKind::cyclic) throw TopologyError("cycle gauge needs a cyclic field");
        checked(id);
        auto g = wrap_path(id, id);
        if (!g) throw PathError("cycle through " + id + " is not closed yet");
        return *g;
    }

    /// Gauge the observer applies to see numbers of `owner`'s frame.
    GaugeTransform view_gauge(const std::string& observer, const std::string& owner) const {
        if (observer == owner) return GaugeTransform::identity();
        {
            std::lock_guard lock(*mu_);
            checked(observer);
            checked(owner);
            if (tree_path(owner, observer))
                if (ancestor_rule_ || topology_.kind != TopologyKind::cyclic)
                    throw VisibilityError("frame " + owner + " is an ancestor of " + observer + " and cannot be seen");
        }
        try {
            return path_gauge(observer, owner);
        } catch (const PathError& e) {
            throw VisibilityError(std::string("frame is not a descendant of the observer: ") + e.what());
        }
    }

    StateSuperposition view_state(const std::string& observer, const std::string& owner, const BasisState& x,
                                  std::size_t cap = kDefaultSupportCap) const {
        if (observer == owner) return basis(x);
        return apply_gauge(view_gauge(observer, owner), x, cap);
    }

    StateSuperposition view_state(const std::string& observer, const std::string& owner,
                                  const StateSuperposition& psi, std::size_t cap = kDefaultSupportCap) const {
        if (observer == owner) return psi;
        return apply_gauge(view_gauge(observer, owner), psi, cap);
    }

    StateSequence view_sequence(const std::string& observer, const std::string& owner, const StateSequence& s) const {
        if (observer == owner) return s;
        return s.gauged(view_gauge(observer, owner));
    }

    // --- export ------------------------------------------------------------

    nlohmann::json to_json() const {
        std::lock_guard lock(*mu_);
        nlohmann::json frames = nlohmann::json::array(), edges = nlohmann::json::array();
        for (const auto& [id, f] : frames_) {
            nlohmann::json j{{"id", id}, {"stage", f.stage}, {"gauge", gauge_to_json(f.gauge)}};
            j["parent"] = f.parent ? nlohmann::json(*f.parent) : nlohmann::json(nullptr);
            frames.push_back(std::move(j));
            if (f.parent) edges.push_back({{"from", *f.parent}, {"to", id}, {"wrap", false}});
        }
        for (const auto& w : wraps_)
            edges.push_back({{"from", w.from}, {"to", w.to}, {"wrap", true}, {"gauge", gauge_to_json(w.gauge)}});
        return {{"topology", topology_.name()}, {"k", topology_.k},         {"ancestor_rule", ancestor_rule_},
                {"anchor", anchor_},            {"frames", std::move(frames)}, {"edges", std::move(edges)}};
    }

    static FrameField from_json(const nlohmann::json& j) {
        FrameField f(Topology::parse(j.at("topology").get<std::string>(), j.value("k", std::int64_t{0})),
                     j.value("ancestor_rule", true));
        f.frames_.clear();
        f.anchor_ = j.at("anchor").get<std::string>();
        for (const auto& x : j.at("frames")) {
            Frame fr{x.at("id").get<std::string>(), x.at("stage").get<std::int64_t>(), gauge_from_json(x.at("gauge")),
                     std::nullopt};
            if (!x.at("parent").is_null()) fr.parent = x.at("parent").get<std::string>();
            f.frames_.emplace(fr.id, std::move(fr));
        }
        for (const auto& e : j.at("edges"))
            if (e.value("wrap", false))
                f.wraps_.push_back(WrapEdge{e.at("from").get<std::string>(), e.at("to").get<std::string>(),
                                            gauge_from_json(e.at("gauge"))});
        if (!f.frames_.count(f.anchor_)) throw DomainError("field JSON lacks its anchor frame");
        return f;
    }

    void write_dot(std::ostream& os) const {
        std::lock_guard lock(*mu_);
        os << "digraph frames {\n  rankdir=LR;\n";
        for (const auto& [id, f] : frames_)
            os << "  \"" << id << "\" [label=\"" << id.substr(0, 6) << "\\nstage " << f.stage << "\"];\n";
        for (const auto& [id, f] : frames_)
            if (f.parent)
                os << "  \"" << *f.parent << "\" -> \"" << id << "\" [label=\"" << f.gauge.fingerprint().substr(0, 6)
                   << "\"];\n";
        for (const auto& w : wraps_)
            os << "  \"" << w.from << "\" -> \"" << w.to << "\" [style=dashed, label=\"" << w.gauge.fingerprint().substr(0, 6)
               << "\"];\n";
        os << "}\n";
    }

private:
    const std::string& checked(const std::string& id) const {
        if (!frames_.count(id)) throw DomainError("unknown frame '" + id + "'");
        return id;
    }

    const Frame& frame_unlocked(const std::string& id) const { return frames_.at(checked(id)); }

    /// Composite gauge down the tree from a to d, or nothing if a is not on
    /// d's parent chain.
    std::optional<GaugeTransform> tree_path(const std::string& a, const std::string& d) const {
        std::vector<const Frame*> chain;
        const Frame* cur = &frames_.at(d);
        while (cur->id != a) {
            if (!cur->parent) return std::nullopt;
            chain.push_back(cur);
            cur = &frames_.at(*cur->parent);
        }
        auto g = GaugeTransform::identity();
        for (auto it = chain.rbegin(); it != chain.rend(); ++it) g = compose((*it)->gauge, g);
        return g;
    }

    /// a -> (tree) -> w -> (wrap) -> anchor -> (tree) -> d. Several routes
    /// with different composites make the path ambiguous.
    std::optional<GaugeTransform> wrap_path(const std::string& a, const std::string& d) const {
        auto tail = tree_path(anchor_, d);
        if (!tail) return std::nullopt;
        std::optional<GaugeTransform> found;
        for (const auto& w : wraps_) {
            auto head = tree_path(a, w.from);
            if (!head) continue;
            auto g = compose(*tail, compose(w.gauge, *head));
            if (found && found->fingerprint() != g.fingerprint())
                throw PathError("several wrap routes from " + a + " to " + d + " give different gauges");
            found = g;
        }
        return found;
    }

    Topology topology_;
    bool ancestor_rule_;
    std::string anchor_;
    std::map<std::string, Frame> frames_;
    std::vector<WrapEdge> wraps_;
    std::unique_ptr<std::mutex> mu_ = std::make_unique<std::mutex>();
};

}  // namespace qframe
