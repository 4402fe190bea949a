#include "threatkb/analysis.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <map>
#include <sstream>

namespace threatkb {

const char* band_name(Band b) {
    switch (b) {
        case Band::Basic: return "basic";
        case Band::EnhancedBasic: return "enhanced_basic";
        case Band::Moderate: return "moderate";
        case Band::High: return "high";
        case Band::BeyondHigh: return "beyond_high";
    }
    return "?";
}

namespace {

const Ontology& builtin() {
    static const Ontology o = builtin_ontology();
    return o;
}

// ---------------------------------------------------------------------------
// Trace satisfaction.
//
// Every subtree is summarized by the set of (start, end) spans it can occupy
// in the trace, one span per way of choosing OR branches underneath. A span
// (s, e) subsumes (s', e') when s >= s' and e <= e': it starts later and
// finishes earlier, so it fits wherever the other does. Keeping only
// unsubsumed spans keeps the sets small without losing any sequencing
// option.
// ---------------------------------------------------------------------------

using Interval = std::pair<int, int>;

std::vector<Interval> prune(std::vector<Interval> v) {
    std::sort(v.begin(), v.end(), [](const Interval& a, const Interval& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    std::vector<Interval> out;
    int best_end = std::numeric_limits<int>::max();
    for (const Interval& iv : v) {
        if (iv.second < best_end) {
            out.push_back(iv);
            best_end = iv.second;
        }
    }
    return out;
}

struct SatSolver {
    const AttackTree& t;
    const std::map<std::string, int>& pos; // leaf id -> 1-based trace index
    std::map<std::string, std::vector<Interval>> memo;

    const std::vector<Interval>& frontier(const std::string& id) {
        auto it = memo.find(id);
        if (it != memo.end()) return it->second;
        memo[id] = {}; // cycle guard: a revisit mid-computation reads "empty"
        std::vector<Interval> result = compute(id);
        return memo[id] = std::move(result);
    }

    std::vector<Interval> compute(const std::string& id) {
        const Node* n = t.find(id);
        if (!n) return {};
        if (n->children.empty()) {
            auto p = pos.find(id);
            if (p == pos.end()) return {};
            return {{p->second, p->second}};
        }
        if (n->kind != NodeKind::Operator) return all_of(n->children);
        switch (n->op.value_or(OperatorKind::And)) {
            case OperatorKind::And: return all_of(n->children);
            case OperatorKind::Or: {
                std::vector<Interval> merged;
                for (const std::string& kid : n->children) {
                    const auto& f = frontier(kid);
                    merged.insert(merged.end(), f.begin(), f.end());
                }
                return prune(std::move(merged));
            }
            case OperatorKind::Sequence:
            case OperatorKind::Before: return in_order(n->children);
            case OperatorKind::After: {
                std::vector<std::string> rev(n->children.rbegin(), n->children.rend());
                return in_order(rev);
            }
        }
        return {};
    }

    // All children must hold; the node spans from the earliest start to the
    // latest end of one choice per child.
    std::vector<Interval> all_of(const std::vector<std::string>& kids) {
        std::vector<Interval> acc{{std::numeric_limits<int>::max(), 0}};
        for (const std::string& kid : kids) {
            const auto& f = frontier(kid);
            if (f.empty()) return {};
            std::vector<Interval> next;
            for (const Interval& a : acc)
                for (const Interval& b : f)
                    next.push_back({std::min(a.first, b.first),
                                    std::max(a.second, b.second)});
            acc = prune(std::move(next));
        }
        return acc;
    }

    // Every stage must finish strictly before the next one starts.
    std::vector<Interval> in_order(const std::vector<std::string>& stages) {
        if (stages.empty()) return {};
        std::vector<Interval> acc = frontier(stages.front());
        for (std::size_t i = 1; i < stages.size(); ++i) {
            const auto& f = frontier(stages[i]);
            std::vector<Interval> next;
            for (const Interval& a : acc)
                for (const Interval& b : f)
                    if (a.second < b.first) next.push_back({a.first, b.second});
            acc = prune(std::move(next));
            if (acc.empty()) return {};
        }
        return acc;
    }
};

} // namespace

bool satisfies(const AttackTree& t, const Trace& trace) {
    std::vector<std::string> leaf_list = leaves(t);
    std::set<std::string> leaf_set(leaf_list.begin(), leaf_list.end());
    std::map<std::string, int> pos;
    for (std::size_t i = 0; i < trace.size(); ++i) {
        if (!leaf_set.count(trace[i]))
            throw Error(ErrorCode::UnknownLeaf,
                        "'" + trace[i] + "' is not a leaf of tree '" + t.name + "'");
        if (!pos.emplace(trace[i], static_cast<int>(i) + 1).second)
            throw Error(ErrorCode::InvalidTrace,
                        "trace lists '" + trace[i] + "' twice");
    }
    SatSolver solver{t, pos, {}};
    return !solver.frontier(t.root).empty();
}

// ---------------------------------------------------------------------------
// Scenario enumeration.
// ---------------------------------------------------------------------------

namespace {

using OrderPairs = std::set<std::pair<std::string, std::string>>;

struct Candidate {
    std::set<std::string> leaves;
    OrderPairs closure; // transitively closed

    bool operator==(const Candidate& o) const {
        return leaves == o.leaves && closure == o.closure;
    }
    bool operator<(const Candidate& o) const {
        if (leaves != o.leaves) return leaves < o.leaves;
        return closure < o.closure;
    }
};

// Closes `pairs` transitively; returns false when the closure contains a
// self-loop (the constraints are contradictory).
bool close(OrderPairs& pairs) {
    bool grew = true;
    while (grew) {
        grew = false;
        OrderPairs add;
        for (const auto& [a, b] : pairs) {
            auto from = pairs.lower_bound({b, ""});
            for (auto it = from; it != pairs.end() && it->first == b; ++it)
                if (!pairs.count({a, it->second})) add.insert({a, it->second});
        }
        if (!add.empty()) {
            pairs.insert(add.begin(), add.end());
            grew = true;
        }
    }
    for (const auto& [a, b] : pairs)
        if (a == b) return false;
    return true;
}

struct Enumerator {
    const AttackTree& t;
    std::vector<Finding>& warnings;
    std::set<std::string> warned; // dedup warning messages
    std::map<std::string, std::vector<Candidate>> memo;

    void warn_cycle(const Candidate& c) {
        std::ostringstream msg;
        msg << "sequencing constraints over {";
        bool first = true;
        std::string cyclic;
        for (const auto& [a, b] : c.closure)
            if (a == b && cyclic.empty()) cyclic = a;
        for (const std::string& l : c.leaves) {
            if (!first) msg << ", ";
            msg << l;
            first = false;
        }
        msg << "} form a cycle; scenario dropped";
        if (warned.insert(msg.str()).second)
            warnings.push_back({Severity::Warning, "CYCLIC_ORDER", cyclic, msg.str()});
    }

    std::vector<Candidate>& enumerate(const std::string& id) {
        auto it = memo.find(id);
        if (it != memo.end()) return it->second;
        memo[id] = {};
        std::vector<Candidate> result = compute(id);
        return memo[id] = std::move(result);
    }

    std::vector<Candidate> compute(const std::string& id) {
        const Node* n = t.find(id);
        if (!n) return {};
        if (n->children.empty()) return {Candidate{{id}, {}}};
        if (n->kind != NodeKind::Operator) return every_child(n->children);
        switch (n->op.value_or(OperatorKind::And)) {
            case OperatorKind::And: return every_child(n->children);
            case OperatorKind::Or: return any_child(n->children);
            case OperatorKind::Sequence:
            case OperatorKind::Before: return staged(n->children);
            case OperatorKind::After: {
                std::vector<std::string> rev(n->children.rbegin(), n->children.rend());
                return staged(rev);
            }
        }
        return {};
    }

    static std::vector<Candidate> dedup(std::vector<Candidate> v) {
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
        return v;
    }

    // Alternatives: pool the children's candidates, then keep only the ones
    // whose leaf set is not a proper superset of a sibling's.
    std::vector<Candidate> any_child(const std::vector<std::string>& kids) {
        std::vector<Candidate> pool;
        for (const std::string& kid : kids) {
            const auto& cs = enumerate(kid);
            pool.insert(pool.end(), cs.begin(), cs.end());
        }
        pool = dedup(std::move(pool));
        return filter_minimal(std::move(pool));
    }

    std::vector<Candidate> every_child(const std::vector<std::string>& kids) {
        std::vector<Candidate> acc{Candidate{}};
        for (const std::string& kid : kids) {
            const auto& cs = enumerate(kid);
            std::vector<Candidate> next;
            for (const Candidate& a : acc)
                for (const Candidate& b : cs) {
                    Candidate merged;
                    merged.leaves = a.leaves;
                    merged.leaves.insert(b.leaves.begin(), b.leaves.end());
                    merged.closure = a.closure;
                    merged.closure.insert(b.closure.begin(), b.closure.end());
                    if (!close(merged.closure)) {
                        warn_cycle(merged);
                        continue;
                    }
                    next.push_back(std::move(merged));
                }
            acc = dedup(std::move(next));
        }
        return acc;
    }

    std::vector<Candidate> staged(const std::vector<std::string>& stages) {
        struct Partial {
            Candidate acc;
            std::set<std::string> last; // leaves of the previous stage's pick
        };
        if (stages.empty()) return {};
        std::vector<Partial> acc;
        for (const Candidate& c : enumerate(stages.front()))
            acc.push_back({c, c.leaves});
        for (std::size_t i = 1; i < stages.size(); ++i) {
            std::vector<Partial> next;
            for (const Partial& p : acc)
                for (const Candidate& b : enumerate(stages[i])) {
                    Candidate merged;
                    merged.leaves = p.acc.leaves;
                    merged.leaves.insert(b.leaves.begin(), b.leaves.end());
                    merged.closure = p.acc.closure;
                    merged.closure.insert(b.closure.begin(), b.closure.end());
                    for (const std::string& x : p.last)
                        for (const std::string& y : b.leaves)
                            merged.closure.insert({x, y});
                    if (!close(merged.closure)) {
                        warn_cycle(merged);
                        continue;
                    }
                    next.push_back({std::move(merged), b.leaves});
                }
            acc = std::move(next);
        }
        std::vector<Candidate> out;
        out.reserve(acc.size());
        for (Partial& p : acc) out.push_back(std::move(p.acc));
        return dedup(std::move(out));
    }

    static std::vector<Candidate> filter_minimal(std::vector<Candidate> v) {
        std::vector<Candidate> out;
        for (const Candidate& c : v) {
            bool dominated = false;
            for (const Candidate& other : v) {
                if (other.leaves.size() < c.leaves.size() &&
                    std::includes(c.leaves.begin(), c.leaves.end(),
                                  other.leaves.begin(), other.leaves.end())) {
                    dominated = true;
                    break;
                }
            }
            if (!dominated) out.push_back(c);
        }
        return out;
    }
};

OrderPairs reduce(const OrderPairs& closure) {
    OrderPairs out;
    for (const auto& [a, b] : closure) {
        bool redundant = false;
        for (const auto& [x, z] : closure) {
            if (x == a && closure.count({z, b})) {
                redundant = true;
                break;
            }
        }
        if (!redundant) out.insert({a, b});
    }
    return out;
}

} // namespace

ScenarioResult enumerate_scenarios(const AttackTree& t) {
    ScenarioResult result;
    Enumerator e{t, result.warnings, {}, {}};
    std::vector<Candidate> roots = e.enumerate(t.root);
    roots = Enumerator::filter_minimal(Enumerator::dedup(std::move(roots)));

    for (const Candidate& c : roots)
        result.scenarios.push_back(Scenario{c.leaves, reduce(c.closure)});
    std::sort(result.scenarios.begin(), result.scenarios.end(),
              [](const Scenario& a, const Scenario& b) {
                  if (a.leaf_set.size() != b.leaf_set.size())
                      return a.leaf_set.size() < b.leaf_set.size();
                  if (a.leaf_set != b.leaf_set) return a.leaf_set < b.leaf_set;
                  if (a.order.size() != b.order.size())
                      return a.order.size() < b.order.size();
                  return a.order < b.order;
              });
    return result;
}

// ---------------------------------------------------------------------------
// Attack-potential rating.
// ---------------------------------------------------------------------------

namespace {

struct FactorTable {
    const char* class_name;
    std::vector<int> points; // indexed by severity rank
};

const std::array<FactorTable, 5>& factor_tables() {
    static const std::array<FactorTable, 5> tables{{
        {"Expertise", {0, 4, 8}},
        {"ElapsedTime", {0, 1, 4, 17, 19}},
        {"Equipment", {0, 4, 7}},
        {"SystemKnowledge", {0, 3, 7, 11}},
        {"WindowOfOpportunity", {0, 1, 4, 10}},
    }};
    return tables;
}

const std::string& factor_term(const AdversaryProfile& p, const std::string& cls) {
    if (cls == "Expertise") return p.expertise;
    if (cls == "ElapsedTime") return p.elapsed_time;
    if (cls == "Equipment") return p.equipment;
    if (cls == "SystemKnowledge") return p.knowledge;
    return p.window;
}

std::string& factor_term(AdversaryProfile& p, const std::string& cls) {
    if (cls == "Expertise") return p.expertise;
    if (cls == "ElapsedTime") return p.elapsed_time;
    if (cls == "Equipment") return p.equipment;
    if (cls == "SystemKnowledge") return p.knowledge;
    return p.window;
}

} // namespace

Band band_for_points(int points) {
    if (points <= 9) return Band::Basic;
    if (points <= 13) return Band::EnhancedBasic;
    if (points <= 19) return Band::Moderate;
    if (points <= 24) return Band::High;
    return Band::BeyondHigh;
}

PotentialRating rate_potential(const AdversaryProfile& p) {
    const Ontology& o = builtin();
    int points = 0;
    for (const FactorTable& f : factor_tables()) {
        int rank = severity_rank(o, f.class_name, factor_term(p, f.class_name));
        points += f.points.at(static_cast<std::size_t>(rank));
    }
    if (!is_term(o, "Location", p.location))
        throw Error(ErrorCode::UnknownTerm,
                    "'" + p.location + "' is not a Location term");
    return {points, band_for_points(points)};
}

AdversaryProfile scenario_requirement(const AttackTree& t, const Scenario& s,
                                      const Ontology& o) {
    AdversaryProfile req;
    for (const std::string& leaf : s.leaf_set) {
        const Node* n = t.find(leaf);
        if (!n)
            throw Error(ErrorCode::UnknownLeaf,
                        "'" + leaf + "' is not a node of tree '" + t.name + "'");
        for (const Annotation& a : n->annotations) {
            if (a.class_name == "Location") {
                if (a.term == "insider") req.location = "insider";
                continue;
            }
            for (const FactorTable& f : factor_tables()) {
                if (a.class_name != f.class_name) continue;
                std::string& current = factor_term(req, f.class_name);
                if (severity_rank(o, f.class_name, a.term) >
                    severity_rank(o, f.class_name, current))
                    current = a.term;
            }
        }
    }
    return req;
}

AdversaryProfile scenario_requirement(const AttackTree& t, const Scenario& s) {
    return scenario_requirement(t, s, builtin());
}

bool feasible(const AdversaryProfile& p, const AdversaryProfile& req,
              const Ontology& o) {
    for (const FactorTable& f : factor_tables()) {
        if (severity_rank(o, f.class_name, factor_term(p, f.class_name)) <
            severity_rank(o, f.class_name, factor_term(req, f.class_name)))
            return false;
    }
    if (req.location == "insider" && p.location != "insider") return false;
    return true;
}

bool feasible(const AdversaryProfile& p, const AdversaryProfile& req) {
    return feasible(p, req, builtin());
}

namespace {

std::string_view trim(std::string_view s) {
    size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

} // namespace

AdversaryProfile parse_profile(std::string_view spec, const Ontology& o) {
    AdversaryProfile p;
    std::size_t pos = 0;
    while (pos <= spec.size()) {
        std::size_t comma = spec.find(',', pos);
        std::string_view part =
            spec.substr(pos, comma == std::string_view::npos ? std::string_view::npos
                                                             : comma - pos);
        pos = comma == std::string_view::npos ? spec.size() + 1 : comma + 1;
        part = trim(part);
        if (part.empty()) continue;
        std::size_t eq = part.find('=');
        if (eq == std::string_view::npos)
            throw Error(ErrorCode::ProfileSyntax,
                        "profile entry '" + std::string(part) + "' is not key=value");
        std::string key(trim(part.substr(0, eq)));
        std::string value(trim(part.substr(eq + 1)));

        std::string cls;
        if (key == "expertise") cls = "Expertise";
        else if (key == "elapsed_time") cls = "ElapsedTime";
        else if (key == "equipment") cls = "Equipment";
        else if (key == "knowledge") cls = "SystemKnowledge";
        else if (key == "window") cls = "WindowOfOpportunity";
        else if (key == "location") cls = "Location";
        else
            throw Error(ErrorCode::ProfileSyntax,
                        "unknown profile factor '" + key +
                            "' (expected expertise, elapsed_time, equipment, "
                            "knowledge, window, or location)");
        if (!is_term(o, cls, value))
            throw Error(ErrorCode::UnknownTerm,
                        "'" + value + "' is not a " + cls + " term");
        if (key == "location") p.location = value;
        else factor_term(p, cls) = value;
    }
    return p;
}

} // namespace threatkb
