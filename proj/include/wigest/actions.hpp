#pragma once

// Gesture -> application action rules.
//
// Rule file lines: family,count_predicate,action,passthrough
//   count_predicate: exact(n) | at_least(n) | any
//   passthrough: attribute names joined by '|' (count, frequency, speed, magnitude), may be empty

#include <algorithm>
#include <fstream>
#include <limits>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "wigest/error.hpp"
#include "wigest/gesture.hpp"
#include "wigest/templates.hpp"
#include "wigest/trace.hpp"

namespace wigest {

struct CountPredicate {
    enum class Kind { Exact, AtLeast, Any } kind = Kind::Any;
    int n = 1;

    bool accepts(int count) const noexcept {
        switch (kind) {
            case Kind::Exact: return count == n;
            case Kind::AtLeast: return count >= n;
            case Kind::Any: return true;
        }
        return false;
    }
    int lowest() const noexcept { return kind == Kind::Any ? 1 : n; }
    int highest() const noexcept { return kind == Kind::Exact ? n : std::numeric_limits<int>::max(); }

    friend bool operator==(const CountPredicate&, const CountPredicate&) = default;
};

inline std::string to_string(const CountPredicate& p) {
    switch (p.kind) {
        case CountPredicate::Kind::Exact: return "exact(" + std::to_string(p.n) + ")";
        case CountPredicate::Kind::AtLeast: return "at_least(" + std::to_string(p.n) + ")";
        case CountPredicate::Kind::Any: return "any";
    }
    return "?";
}

inline CountPredicate parse_count_predicate(std::string_view text) {
    text = detail::trim(text);
    if (text == "any") return {};
    const auto open = text.find('(');
    if (open == std::string_view::npos || text.back() != ')')
        fail(ErrorKind::Config, "bad count predicate '" + std::string(text) + "'");
    const auto name = text.substr(0, open);
    const auto arg = detail::parse_double(text.substr(open + 1, text.size() - open - 2));
    if (!arg || *arg < 1 || *arg != static_cast<int>(*arg))
        fail(ErrorKind::Config, "count predicate needs a positive integer: '" + std::string(text) + "'");
    CountPredicate p;
    p.n = static_cast<int>(*arg);
    if (name == "exact") p.kind = CountPredicate::Kind::Exact;
    else if (name == "at_least") p.kind = CountPredicate::Kind::AtLeast;
    else fail(ErrorKind::Config, "unknown count predicate '" + std::string(name) + "'");
    return p;
}

enum class Attribute { Count, Frequency, Speed, Magnitude };

inline std::string_view to_string(Attribute a) {
    switch (a) {
        case Attribute::Count: return "count";
        case Attribute::Frequency: return "frequency";
        case Attribute::Speed: return "speed";
        case Attribute::Magnitude: return "magnitude";
    }
    return "?";
}

inline Attribute parse_attribute(std::string_view s) {
    if (s == "count") return Attribute::Count;
    if (s == "frequency") return Attribute::Frequency;
    if (s == "speed") return Attribute::Speed;
    if (s == "magnitude") return Attribute::Magnitude;
    fail(ErrorKind::Config, "unknown attribute '" + std::string(s) + "'");
}

struct ActionRule {
    std::string family_name;
    CountPredicate count;
    std::string action_name;
    std::set<Attribute> passthrough;
};

struct ActionEvent {
    std::string action_name;
    std::string family_name;
    double start_s = 0.0;
    double end_s = 0.0;
    std::optional<int> count;
    std::optional<double> frequency_hz;
    std::optional<Speed> speed;
    std::optional<Magnitude> magnitude;
};

inline bool overlaps(const CountPredicate& a, const CountPredicate& b) {
    return std::max(a.lowest(), b.lowest()) <= std::min(a.highest(), b.highest());
}

class RuleSet {
public:
    RuleSet() = default;
    explicit RuleSet(std::vector<ActionRule> rules) {
        for (auto& r : rules) add(std::move(r));
    }

    // Rejects any rule that could fire together with an existing one.
    void add(ActionRule rule) {
        if (rule.family_name.empty()) fail(ErrorKind::Config, "rule with empty family");
        if (rule.family_name == kUnknownFamily) fail(ErrorKind::Config, "'unknown' cannot trigger an action");
        if (rule.action_name.empty()) fail(ErrorKind::Config, "rule for '" + rule.family_name + "' has no action");
        for (const auto& r : rules_)
            if (r.family_name == rule.family_name && overlaps(r.count, rule.count))
                fail(ErrorKind::Config, "rules '" + r.action_name + "' and '" + rule.action_name +
                                            "' both fire for family '" + rule.family_name + "'");
        rules_.push_back(std::move(rule));
    }

    const std::vector<ActionRule>& rules() const noexcept { return rules_; }
    std::size_t size() const noexcept { return rules_.size(); }

    const ActionRule* find(std::string_view family, int count) const {
        for (const auto& r : rules_)
            if (r.family_name == family && r.count.accepts(count)) return &r;
        return nullptr;
    }

    // Families the rules mention that the template set cannot produce.
    std::vector<std::string> unknown_families(const TemplateSet& templates) const {
        std::vector<std::string> out;
        for (const auto& r : rules_)
            if (!templates.find(r.family_name)) out.push_back(r.family_name);
        return out;
    }

private:
    std::vector<ActionRule> rules_;
};

inline std::optional<ActionEvent> map_action(const GestureEvent& gesture, const RuleSet& rules) {
    if (!gesture.known()) return std::nullopt;
    const auto* rule = rules.find(gesture.family_name, gesture.count);
    if (!rule) return std::nullopt;
    ActionEvent out;
    out.action_name = rule->action_name;
    out.family_name = gesture.family_name;
    out.start_s = gesture.start_s;
    out.end_s = gesture.end_s;
    for (auto a : rule->passthrough) {
        switch (a) {
            case Attribute::Count: out.count = gesture.count; break;
            case Attribute::Frequency: out.frequency_hz = gesture.frequency_hz; break;
            case Attribute::Speed: out.speed = gesture.speed; break;
            case Attribute::Magnitude: out.magnitude = gesture.magnitude; break;
        }
    }
    return out;
}

inline RuleSet read_rules(std::istream& in) {
    RuleSet set;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto text = detail::trim(line);
        if (text.empty() || text.front() == '#') continue;
        const auto where = "rules line " + std::to_string(line_no) + ": ";
        const auto fields = detail::split(text, ',');
        if (fields.size() != 4) fail(ErrorKind::Config, where + "expected family,count_predicate,action,passthrough");
        try {
            ActionRule r;
            r.family_name = std::string(detail::trim(fields[0]));
            r.count = parse_count_predicate(fields[1]);
            r.action_name = std::string(detail::trim(fields[2]));
            const auto pass = detail::trim(fields[3]);
            if (!pass.empty())
                for (auto a : detail::split(pass, '|')) r.passthrough.insert(parse_attribute(detail::trim(a)));
            set.add(std::move(r));
        } catch (const Error& e) {
            fail(ErrorKind::Config, where + e.what());
        }
    }
    return set;
}

inline RuleSet parse_rules(std::string_view text) {
    std::istringstream in{std::string(text)};
    return read_rules(in);
}

inline RuleSet load_rules(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::Io, "cannot open rule file '" + path + "'");
    return read_rules(in);
}

// Media-player bindings; also shipped as data/media_player_rules.csv.
inline constexpr std::string_view kDefaultRulesText =
    "# family,count_predicate,action,passthrough\n"
    "Up-Down,exact(1),play,\n"
    "Up-Down,at_least(2),fast-forward,count\n"
    "Up-Pause-Down,any,pause,\n"
    "Down-Up,at_least(2),rewind,count\n"
    "Up,any,volume-up,speed\n"
    "Down,any,volume-down,speed\n"
    "Infinity,any,mute-toggle,\n";

inline const RuleSet& default_rules() {
    static const RuleSet set = parse_rules(kDefaultRulesText);
    return set;
}

}  // namespace wigest
