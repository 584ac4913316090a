#pragma once

// Majority vote across APs with the strongest AP breaking ties.

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "wigest/error.hpp"
#include "wigest/types.hpp"

namespace wigest {

template <typename Decision>
struct ApDecision {
    std::string ap_id;
    double mean_rssi_dbm = 0.0;
    Decision decision{};
    double start_s = 0.0;  // span the decision covers
    double end_s = 0.0;
};

// Plurality winner. Among tied camps the one holding the strongest AP wins;
// equal strongest RSSI falls back to the smaller ap_id so the result never
// depends on input order.
template <typename Decision>
Decision fuse(const std::vector<ApDecision<Decision>>& decisions) {
    if (decisions.empty()) fail(ErrorKind::Domain, "fuse needs at least one decision");
    for (const auto& d : decisions)
        if (!std::isfinite(d.mean_rssi_dbm)) fail(ErrorKind::Domain, "AP '" + d.ap_id + "' has non-finite RSSI");

    struct Camp {
        Decision value;
        int votes = 0;
        const ApDecision<Decision>* strongest = nullptr;
    };
    std::vector<Camp> camps;
    const auto stronger = [](const ApDecision<Decision>* a, const ApDecision<Decision>* b) {
        if (a->mean_rssi_dbm != b->mean_rssi_dbm) return a->mean_rssi_dbm > b->mean_rssi_dbm;
        return a->ap_id < b->ap_id;
    };
    for (const auto& d : decisions) {
        auto it = std::find_if(camps.begin(), camps.end(), [&](const Camp& c) { return c.value == d.decision; });
        if (it == camps.end()) {
            camps.push_back({d.decision, 0, &d});
            it = camps.end() - 1;
        }
        ++it->votes;
        if (stronger(&d, it->strongest)) it->strongest = &d;
    }
    const Camp* best = &camps.front();
    for (const auto& c : camps) {
        if (c.votes > best->votes || (c.votes == best->votes && stronger(c.strongest, best->strongest))) best = &c;
    }
    return best->value;
}

// --- event streams ----------------------------------------------------------

struct ApEvents {
    std::string ap_id;
    double mean_rssi_dbm = 0.0;
    std::vector<PrimitiveEvent> events;
};

inline double overlap_fraction(double a0, double a1, double b0, double b1) {
    const double inter = std::min(a1, b1) - std::max(a0, b0);
    const double shorter = std::min(a1 - a0, b1 - b0);
    if (inter <= 0.0 || shorter <= 0.0) return 0.0;
    return inter / shorter;
}

// Events from different APs describe the same motion when their spans overlap by
// at least half of the shorter one. Spans narrower than min_span_s are widened
// about their middle first: under heavy noise fitted ramps shrink towards steps
// whose position jitters by more than their width. Every AP votes in every cluster: its event
// kind, or "nothing" when it saw no event there. A cluster whose winner is
// "nothing" is dropped, so a spurious edge on one AP cannot survive a 3-AP vote.
// The surviving event is the strongest winning AP's, which keeps its timing and
// attributes consistent.
inline std::vector<PrimitiveEvent> fuse_events(const std::vector<ApEvents>& streams, double min_overlap = 0.5,
                                               double min_span_s = 1.0) {
    if (streams.empty()) fail(ErrorKind::Domain, "fuse_events needs at least one stream");
    if (streams.size() == 1) return streams.front().events;

    struct Member {
        std::size_t ap;
        const PrimitiveEvent* event;
        double start_s, end_s;  // span used for clustering
    };
    struct Cluster {
        double start_s, end_s;
        std::vector<Member> members;
    };
    std::vector<Member> all;
    for (std::size_t a = 0; a < streams.size(); ++a)
        for (const auto& e : streams[a].events) {
            const double half = 0.5 * std::max(e.duration_s(), min_span_s);
            all.push_back({a, &e, e.mid_s() - half, e.mid_s() + half});
        }
    std::sort(all.begin(), all.end(), [&](const Member& x, const Member& y) {
        if (x.event->mid_s() != y.event->mid_s()) return x.event->mid_s() < y.event->mid_s();
        return streams[x.ap].ap_id < streams[y.ap].ap_id;
    });

    std::vector<Cluster> clusters;
    for (const auto& m : all) {
        Cluster* home = nullptr;
        double best = 0.0;
        for (auto it = clusters.rbegin(); it != clusters.rend(); ++it) {
            if (it->end_s < m.start_s - 60.0) break;
            const bool taken = std::any_of(it->members.begin(), it->members.end(),
                                           [&](const Member& o) { return o.ap == m.ap; });
            if (taken) continue;
            const double f = overlap_fraction(it->start_s, it->end_s, m.start_s, m.end_s);
            if (f >= min_overlap && f > best) {
                best = f;
                home = &*it;
            }
        }
        if (home) {
            home->members.push_back(m);
        } else {
            clusters.push_back({m.start_s, m.end_s, {m}});
        }
    }

    std::vector<PrimitiveEvent> out;
    for (const auto& c : clusters) {
        std::vector<ApDecision<std::optional<PrimitiveKind>>> votes;
        for (std::size_t a = 0; a < streams.size(); ++a) {
            ApDecision<std::optional<PrimitiveKind>> v;
            v.ap_id = streams[a].ap_id;
            v.mean_rssi_dbm = streams[a].mean_rssi_dbm;
            for (const auto& m : c.members)
                if (m.ap == a) v.decision = m.event->kind;
            votes.push_back(v);
        }
        const auto winner = fuse(votes);
        if (!winner) continue;
        const PrimitiveEvent* chosen = nullptr;
        double strongest = -1e300;
        for (const auto& m : c.members) {
            if (m.event->kind != *winner) continue;
            const double rssi = streams[m.ap].mean_rssi_dbm;
            if (!chosen || rssi > strongest) {
                chosen = m.event;
                strongest = rssi;
            }
        }
        out.push_back(*chosen);
    }
    std::sort(out.begin(), out.end(),
              [](const PrimitiveEvent& a, const PrimitiveEvent& b) { return a.start_s < b.start_s; });
    // Winners from different APs can overlap slightly; meet in the middle.
    for (std::size_t i = 1; i < out.size(); ++i) {
        if (out[i - 1].end_s > out[i].start_s) {
            const double cut = 0.5 * (out[i - 1].end_s + out[i].start_s);
            out[i - 1].end_s = cut;
            out[i].start_s = cut;
        }
    }
    std::erase_if(out, [](const PrimitiveEvent& e) { return !(e.end_s > e.start_s); });
    for (auto& e : out)
        if (e.is_edge()) e.speed = speed_from_duration(e.duration_s());
    return out;
}

}  // namespace wigest
