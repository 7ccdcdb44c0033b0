#include "webca/pallium.hpp"

#include <algorithm>

namespace webca::pallium {

std::string context_name(Context c) {
    switch (c) {
        case Context::ActiveElectrolocation: return "active_electrolocation";
        case Context::PassiveElectrolocation: return "passive_electrolocation";
        case Context::Communication: return "communication";
    }
    return "?";
}

Context context_from_name(const std::string& name) {
    if (name == "active_electrolocation") return Context::ActiveElectrolocation;
    if (name == "passive_electrolocation") return Context::PassiveElectrolocation;
    if (name == "communication") return Context::Communication;
    throw ValidationError("unknown context: " + name);
}

void validate_rules(const std::vector<Rule>& rules) {
    const std::array<Context, 3> contexts = {Context::ActiveElectrolocation,
                                             Context::PassiveElectrolocation,
                                             Context::Communication};
    const std::array<tectum::EventKind, 4> kinds = {
        tectum::EventKind::ObjectEcho, tectum::EventKind::ExternalLowFreqField,
        tectum::EventKind::ConspecificChirp, tectum::EventKind::Quiet};
    for (Context c : contexts) {
        for (tectum::EventKind k : kinds) {
            const bool covered = std::any_of(rules.begin(), rules.end(), [&](const Rule& r) {
                return r.event == k && (!r.when_context || *r.when_context == c);
            });
            if (!covered)
                throw ValidationError("rule table does not cover (" + context_name(c) + ", " +
                                      tectum::event_kind_name(k) + ")");
        }
    }
    for (const Rule& r : rules)
        if (r.threshold <= 0.0) throw ValidationError("rule threshold must be > 0");
}

void validate_policies(const PolicyTable& policies) {
    for (Context c : {Context::ActiveElectrolocation, Context::PassiveElectrolocation,
                      Context::Communication}) {
        auto it = policies.find(c);
        if (it == policies.end())
            throw MissingPolicy("no policy entry for context " + context_name(c));
        if (it->second.empty())
            throw MissingPolicy("policy for " + context_name(c) + " issues no commands");
    }
}

PalliumState observe(const PalliumState& state, const std::vector<tectum::EventKind>& events) {
    PalliumState next = state;
    for (auto& c : next.event_counters) c *= next.gamma;
    for (tectum::EventKind e : events) next.event_counters[static_cast<size_t>(e)] += 1.0;
    next.dwell_ticks += 1;
    return next;
}

TransitionResult transition(const PalliumState& state) {
    TransitionResult out{state, std::nullopt};
    if (state.dwell_ticks < state.min_dwell_ticks) return out;

    std::vector<const Rule*> sorted;
    sorted.reserve(state.rules.size());
    for (const Rule& r : state.rules) sorted.push_back(&r);
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const Rule* a, const Rule* b) { return a->priority < b->priority; });

    for (const Rule* r : sorted) {
        if (r->when_context && *r->when_context != state.context) continue;
        if (!r->target || *r->target == state.context) continue;  // stay rules never fire
        if (state.event_counters[static_cast<size_t>(r->event)] >= r->threshold) {
            out.state.context = *r->target;
            out.state.dwell_ticks = 0;
            out.changed_to = *r->target;
            return out;
        }
    }
    return out;
}

std::vector<sensing::TuningCommand> issue_commands(Context old_context, Context new_context,
                                                   const PolicyTable& policies) {
    if (old_context == new_context)
        throw Error("issue_commands requires an actual context change");
    auto it = policies.find(new_context);
    if (it == policies.end())
        throw MissingPolicy("no policy entry for context " + context_name(new_context));
    return {it->second};
}

}  // namespace webca::pallium
