#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "webca/sensing.hpp"
#include "webca/tectum.hpp"

namespace webca::pallium {

enum class Context { ActiveElectrolocation, PassiveElectrolocation, Communication };
std::string context_name(Context c);
Context context_from_name(const std::string& name);

struct Rule {
    std::optional<Context> when_context;  // nullopt = any context
    tectum::EventKind event = tectum::EventKind::Quiet;
    double threshold = 0.0;               // fires when the decayed counter reaches this
    std::optional<Context> target;        // nullopt = stay
    int priority = 0;                     // lower value = higher priority
};

struct PalliumState {
    Context context = Context::ActiveElectrolocation;
    std::array<double, 4> event_counters{};  // indexed by EventKind
    long dwell_ticks = 0;
    double gamma = 0.9;  // per-tick decay, in (0,1)
    long min_dwell_ticks = 0;
    std::vector<Rule> rules;  // kept sorted by priority
};

// Per-target-context command set issued on a transition.
using PolicyTable = std::map<Context, sensing::TuningCommand>;

void validate_rules(const std::vector<Rule>& rules);
void validate_policies(const PolicyTable& policies);

PalliumState observe(const PalliumState& state, const std::vector<tectum::EventKind>& events);

struct TransitionResult {
    PalliumState state;
    std::optional<Context> changed_to;
};

TransitionResult transition(const PalliumState& state);

std::vector<sensing::TuningCommand> issue_commands(Context old_context, Context new_context,
                                                   const PolicyTable& policies);

}  // namespace webca::pallium
