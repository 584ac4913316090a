#pragma once

// Gesture family templates: `family_name,pattern,repeatable`, pattern over {+,-,0}.

#include <algorithm>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "wigest/error.hpp"
#include "wigest/trace.hpp"

namespace wigest {

struct GestureTemplate {
    std::string family_name;
    std::string pattern;
    bool repeatable = false;

    friend bool operator==(const GestureTemplate&, const GestureTemplate&) = default;
};

inline constexpr std::string_view kUnknownFamily = "unknown";

// Shipped as data/templates.csv as well; keep the two in sync.
inline constexpr std::string_view kDefaultTemplatesText =
    "# family_name,pattern,repeatable\n"
    "Up,+,false\n"
    "Down,-,false\n"
    "Up-Down,+-,true\n"
    "Down-Up,-+,true\n"
    "Up-Pause-Down,+0-,false\n"
    "Down-Pause-Up,-0+,false\n"
    "Infinity,-+-,false\n";

class TemplateSet {
public:
    TemplateSet() = default;

    explicit TemplateSet(std::vector<GestureTemplate> templates) {
        for (auto& t : templates) add(std::move(t));
    }

    void add(GestureTemplate t) {
        if (t.family_name.empty()) fail(ErrorKind::Config, "template with empty family name");
        if (t.family_name == kUnknownFamily) fail(ErrorKind::Config, "'unknown' is reserved");
        if (t.pattern.empty()) fail(ErrorKind::Config, "template '" + t.family_name + "' has an empty pattern");
        for (char c : t.pattern)
            if (c != '+' && c != '-' && c != '0')
                fail(ErrorKind::Config, "template '" + t.family_name + "' pattern has invalid character");
        for (const auto& existing : templates_) {
            if (existing.pattern == t.pattern)
                fail(ErrorKind::Config, "duplicate pattern '" + t.pattern + "' for '" + existing.family_name +
                                            "' and '" + t.family_name + "'");
            if (existing.family_name == t.family_name)
                fail(ErrorKind::Config, "duplicate family '" + t.family_name + "'");
        }
        templates_.push_back(std::move(t));
    }

    const std::vector<GestureTemplate>& templates() const noexcept { return templates_; }
    std::size_t size() const noexcept { return templates_.size(); }

    const GestureTemplate* find(std::string_view family) const {
        auto it = std::find_if(templates_.begin(), templates_.end(),
                               [&](const GestureTemplate& t) { return t.family_name == family; });
        return it == templates_.end() ? nullptr : &*it;
    }

    const GestureTemplate& at(std::string_view family) const {
        if (const auto* t = find(family)) return *t;
        fail(ErrorKind::Domain, "unknown gesture family '" + std::string(family) + "'");
    }

private:
    std::vector<GestureTemplate> templates_;
};

inline bool parse_bool(std::string_view s, bool& out) {
    if (s == "true" || s == "1" || s == "yes") { out = true; return true; }
    if (s == "false" || s == "0" || s == "no") { out = false; return true; }
    return false;
}

inline TemplateSet read_templates(std::istream& in) {
    TemplateSet set;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto text = detail::trim(line);
        if (text.empty() || text.front() == '#') continue;
        const auto fields = detail::split(text, ',');
        const auto where = "templates line " + std::to_string(line_no) + ": ";
        if (fields.size() != 3) fail(ErrorKind::Config, where + "expected family_name,pattern,repeatable");
        bool repeatable = false;
        if (!parse_bool(fields[2], repeatable)) fail(ErrorKind::Config, where + "bad repeatable flag");
        try {
            set.add({std::string(fields[0]), std::string(fields[1]), repeatable});
        } catch (const Error& e) {
            fail(ErrorKind::Config, where + e.what());
        }
    }
    if (set.size() == 0) fail(ErrorKind::Config, "template table is empty");
    return set;
}

inline TemplateSet parse_templates(std::string_view text) {
    std::istringstream in{std::string(text)};
    return read_templates(in);
}

inline TemplateSet load_templates(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::Io, "cannot open template file '" + path + "'");
    return read_templates(in);
}

inline const TemplateSet& default_templates() {
    static const TemplateSet set = parse_templates(kDefaultTemplatesText);
    return set;
}

}  // namespace wigest
