#include "vrpkit/pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <ctime>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>

#include <json.hpp>

#include "vrpkit/errors.hpp"
#include "vrpkit/sol_file.hpp"

namespace vrpkit {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Canonical description fields

std::vector<std::string> canonical_inputs(const Instance& inst, const ConstraintSet& cs) {
    const std::string code = variant_code(cs);
    if (code == "TSP") return {"node_coordinates"};
    if (code == "ATSP") return {"edge_weight_matrix"};
    if (code == "SOP")
        return {"edge_weight_matrix", "precedence_constraints", "forbidden_arcs"};
    std::vector<std::string> x{"depot"};
    x.push_back(inst.coords ? "node_coordinates" : "edge_weight_matrix");
    if (cs.capacity_on) {
        x.push_back("demands");
        x.push_back("capacity");
    }
    if (cs.time_windows_on) {
        x.push_back("service_times");
        x.push_back("time_windows");
    }
    if (cs.distance_limit_on) x.push_back("distance_limit");
    if (cs.electric_on) {
        x.push_back("fuel_capacity");
        x.push_back("fuel_consumption_rate");
        x.push_back("refuel_rate");
        x.push_back("stations");
    }
    return x;
}

std::vector<std::pair<std::string, std::string>> canonical_constraints(const ConstraintSet& cs) {
    const std::string code = variant_code(cs);
    std::vector<std::pair<std::string, std::string>> k;
    if (cs.electric_on)
        k.emplace_back("Electricity (E)",
                       "vehicles carry a limited battery, drain it per distance unit at the "
                       "consumption rate, and may recharge at stations; recharging takes time "
                       "set by the refuel rate");
    if (cs.capacity_on)
        k.emplace_back("Capacity (C)", "the load on a vehicle can never exceed its capacity");
    if (cs.open_route)
        k.emplace_back("Open Route (O)",
                       "routes end at their last customer instead of returning to a depot");
    if (cs.backhaul_on)
        k.emplace_back("Backhaul (B)", "all deliveries on a route run before any pickup");
    if (cs.mixed_backhaul_on)
        k.emplace_back("Mixed Backhaul (MB)",
                       "deliveries and pickups may interleave while the load stays within "
                       "capacity");
    if (cs.distance_limit_on)
        k.emplace_back("Distance Limit (L)", "the driven distance of each route is capped");
    if (cs.time_windows_on)
        k.emplace_back("Time Windows (TW)",
                       "service at each customer starts inside its window; early arrivals wait");
    if (cs.multi_depot)
        k.emplace_back("Multi Depot (MD)", "routes may be based at any of several depots");
    if (cs.asymmetric && (code == "ATSP" || code == "ACVRP"))
        k.emplace_back("Asymmetry", "travel cost depends on direction");
    if (cs.precedence_on) {
        k.emplace_back("Precedence", "some nodes must be visited before others");
        k.emplace_back("Forbidden Arcs", "some node-to-node connections cannot be used");
    }
    k.emplace_back("Visit (V)", "every customer is served exactly once");
    if (code != "TSP" && code != "SOP")
        k.emplace_back("Depot (D)", cs.open_route ? "every route starts at a depot"
                                                  : "every route starts and ends at its depot");
    return k;
}

std::string canonical_summary(const ConstraintSet& cs) {
    const std::string code = variant_code(cs);
    if (code == "TSP")
        return "Find the shortest closed tour that visits every node exactly once.";
    if (code == "ATSP")
        return "Find the shortest closed tour visiting every node exactly once under "
               "direction-dependent travel costs.";
    if (code == "SOP")
        return "Find the cheapest Hamiltonian path that visits every node once while honoring "
               "precedence requirements and avoiding forbidden arcs.";
    std::string s = code + ": plan minimum-distance vehicle routes that serve every customer "
                           "exactly once";
    if (cs.capacity_on) s += ", within vehicle capacity";
    if (cs.backhaul_on) s += ", deliveries strictly before pickups";
    if (cs.mixed_backhaul_on) s += ", with interleaved deliveries and pickups";
    if (cs.distance_limit_on) s += ", each route under a distance cap";
    if (cs.time_windows_on) s += ", inside customer time windows";
    if (cs.electric_on) s += ", with battery-limited vehicles recharging at stations";
    if (cs.multi_depot) s += ", dispatched from multiple depots";
    s += cs.open_route ? "; vehicles do not return to a depot." : "; routes start and end at "
                                                                  "their depot.";
    return s;
}

std::string canonical_output_contract(const ConstraintSet& cs) {
    const std::string code = variant_code(cs);
    if (code == "TSP" || code == "ATSP")
        return "A single closed tour that starts and ends at one node and visits every node "
               "exactly once.";
    if (code == "SOP")
        return "A minimum-cost Hamiltonian path visiting each node exactly once that satisfies "
               "all precedence and forbidden-arc requirements.";
    std::string s = "A set of vehicle routes, each starting at ";
    s += cs.multi_depot ? "one of the depots" : "the depot";
    s += cs.open_route ? " and ending at its last customer" : " and returning to it";
    s += ", visiting every customer exactly once while satisfying every active constraint";
    if (cs.electric_on) s += ", including any charging-station stops";
    s += ".";
    return s;
}

std::string canonical_objective() { return "Minimize the total travel distance."; }

// ---------------------------------------------------------------------------
// Prompts

namespace prompts {

namespace {
std::string block(const std::string& tag, const std::string& body) {
    return "--- BEGIN " + tag + " ---\n" + body + (body.ends_with('\n') ? "" : "\n") +
           "--- END " + tag + " ---\n";
}

std::string bracket_payload(const std::string& line) {
    const size_t open = line.find('[');
    const size_t close = line.rfind(']');
    if (open == std::string::npos || close == std::string::npos || close <= open) return "";
    return line.substr(open + 1, close - open - 1);
}

std::string find_numbered_line(const std::string& text, const std::string& prefix) {
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        size_t at = line.find_first_not_of(" \t");
        if (at == std::string::npos) continue;
        if (line.compare(at, prefix.size(), prefix) == 0) return line.substr(at);
    }
    return "";
}
} // namespace

std::string extract_block(const std::string& prompt, const std::string& tag) {
    const std::string begin = "--- BEGIN " + tag + " ---\n";
    const std::string end = "--- END " + tag + " ---";
    const size_t b = prompt.find(begin);
    if (b == std::string::npos) return "";
    const size_t start = b + begin.size();
    const size_t e = prompt.find(end, start);
    if (e == std::string::npos) return "";
    return prompt.substr(start, e - start);
}

std::string hints_text(const VariantHints& hints) {
    std::string out;
    if (hints.open_route)
        out += std::string("open_route=") + (*hints.open_route ? "true" : "false") + "\n";
    if (hints.mixed_backhaul)
        out += std::string("mixed_backhaul=") + (*hints.mixed_backhaul ? "true" : "false") +
               "\n";
    return out;
}

VariantHints parse_hints(const std::string& text) {
    VariantHints h;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line == "open_route=true") h.open_route = true;
        if (line == "open_route=false") h.open_route = false;
        if (line == "mixed_backhaul=true") h.mixed_backhaul = true;
        if (line == "mixed_backhaul=false") h.mixed_backhaul = false;
    }
    return h;
}

namespace {
std::string hints_section(const std::string& hints) {
    if (hints.empty()) return "";
    return "Caller-supplied facts the file cannot state (treat as ground truth):\n" +
           block("HINTS", hints);
}
} // namespace

std::string ga_phase1(const std::string& instance_text, const std::string& hints) {
    return "Task code: P1\n"
           "You are analyzing one vehicle routing instance given in VRPLIB text form.\n"
           "Answer with exactly three lines and nothing else:\n"
           "1) [one-sentence statement of what this problem asks]\n"
           "2) [numbered constraint list, each entry as 'Name (ABBR): short explanation'; "
           "include the visit rule]\n"
           "3) \"STANDARD_TYPE_CODE\"\n"
           "Lines 1 and 2 wrap their payload in square brackets; line 3 wraps the type code "
           "in double quotes. Do not repeat instance-specific numbers.\n" +
           hints_section(hints) + block("INSTANCE", instance_text);
}

std::string ga_phase2(const std::string& phase1_answer, const std::string& instance_text,
                      const std::string& hints) {
    return "Task code: P2\n"
           "We are building an algorithm for the instance below, already described as:\n" +
           block("FIRST ANSWER", phase1_answer) +
           "Answer with exactly three lines and nothing else:\n"
           "4) [comma-separated input field names the algorithm must read; underscores, "
           "no spaces, only fields the instance actually provides]\n"
           "5) [what the algorithm must output]\n"
           "6) [the optimization objective]\n"
           "Each payload sits in square brackets. Do not repeat instance-specific numbers.\n" +
           hints_section(hints) + block("INSTANCE", instance_text);
}

std::string ja(const std::string& instance_text, const std::string& hints,
               const std::string& answer1, const std::string& answer2) {
    return "Task code: JUDGE\n"
           "You are reviewing a two-part description of the vehicle routing instance below. "
           "The instance text is the only ground truth.\n"
           "Check the first answer (description, constraints, type code) for conflicts with "
           "the instance and for internal consistency. Check the second answer (input, "
           "output, objective): every input must be a real instance field, written with "
           "underscores.\n"
           "Answer with exactly four lines:\n"
           "1) right1: True/False\n"
           "2) jud1: single-line explanation\n"
           "3) right2: True/False\n"
           "4) jud2: single-line explanation, with concrete fixes when False\n" +
           hints_section(hints) + block("INSTANCE", instance_text) +
           block("FIRST ANSWER", answer1) + block("SECOND ANSWER", answer2);
}

std::string ra_phase1(const std::string& instance_text, const std::string& hints,
                      const std::string& previous, const std::string& issues) {
    return "Task code: R1\n"
           "Rewrite the three-line description of the instance below, fixing the issues "
           "raised. Keep the exact output shape:\n"
           "1) [problem description]\n"
           "2) [numbered constraint list 'Name (ABBR): explanation']\n"
           "3) \"STANDARD_TYPE_CODE\"\n" +
           block("PREVIOUS ANSWER", previous) + block("ISSUES", issues) +
           hints_section(hints) + block("INSTANCE", instance_text);
}

std::string ra_phase2(const std::string& instance_text, const std::string& hints,
                      const std::string& previous, const std::string& issues) {
    return "Task code: R2\n"
           "Rewrite the three-line input/output/objective answer for the instance below, "
           "fixing the issues raised. Keep the exact output shape:\n"
           "4) [input field names, underscores]\n"
           "5) [output]\n"
           "6) [objective]\n" +
           block("PREVIOUS ANSWER", previous) + block("ISSUES", issues) +
           hints_section(hints) + block("INSTANCE", instance_text);
}

std::string eaa(const std::string& instance_text, const std::string& description,
                const std::string& error_text) {
    return "Task code: ERROR\n"
           "A solve attempt for the instance below failed. Diagnose the cause from the error "
           "text and suggest a concrete correction.\n"
           "Answer with exactly one line:\n"
           "jud: explanation and suggestions, plain text, no line breaks\n" +
           block("DESCRIPTION", description) + block("ERROR", error_text) +
           block("INSTANCE", instance_text);
}

std::string format_phase1(const ProblemDescription& desc) {
    std::string constraints;
    for (size_t i = 0; i < desc.constraints.size(); ++i) {
        if (i) constraints += " ";
        constraints += std::to_string(i + 1) + ") " + desc.constraints[i].first + ": " +
                       desc.constraints[i].second + ".";
    }
    return "1) [" + desc.summary + "]\n2) [" + constraints + "]\n3) \"" + desc.problem_type +
           "\"\n";
}

std::string format_phase2(const ProblemDescription& desc) {
    std::string inputs;
    for (size_t i = 0; i < desc.inputs.size(); ++i) {
        if (i) inputs += ", ";
        inputs += desc.inputs[i];
    }
    return "4) [" + inputs + "]\n5) [" + desc.output_contract + "]\n6) [" + desc.objective +
           "]\n";
}

std::optional<Phase1> parse_phase1(const std::string& response) {
    Phase1 out;
    const std::string l1 = find_numbered_line(response, "1)");
    const std::string l2 = find_numbered_line(response, "2)");
    const std::string l3 = find_numbered_line(response, "3)");
    if (l1.empty() || l2.empty() || l3.empty()) return std::nullopt;
    out.summary = bracket_payload(l1);
    const std::string klist = bracket_payload(l2);
    if (out.summary.empty() || klist.empty()) return std::nullopt;
    const size_t q1 = l3.find('"');
    const size_t q2 = l3.rfind('"');
    if (q1 == std::string::npos || q2 <= q1) return std::nullopt;
    out.code = l3.substr(q1 + 1, q2 - q1 - 1);
    if (out.code.empty()) return std::nullopt;

    // "1) Name (A): explanation. 2) Name: explanation." -> (name, explanation)
    std::vector<size_t> starts;
    for (size_t i = 0; i + 1 < klist.size(); ++i) {
        if (std::isdigit(static_cast<unsigned char>(klist[i])) && klist[i + 1] == ')' &&
            (i == 0 || klist[i - 1] == ' '))
            starts.push_back(i);
    }
    if (starts.empty()) return std::nullopt;
    starts.push_back(klist.size());
    for (size_t s = 0; s + 1 < starts.size(); ++s) {
        std::string item = klist.substr(starts[s], starts[s + 1] - starts[s]);
        item = item.substr(item.find(')') + 1);
        const size_t colon = item.find(':');
        std::string name = colon == std::string::npos ? item : item.substr(0, colon);
        std::string expl = colon == std::string::npos ? "" : item.substr(colon + 1);
        auto tidy = [](std::string& s) {
            while (!s.empty() && (s.front() == ' ' || s.front() == '.')) s.erase(s.begin());
            while (!s.empty() && (s.back() == ' ' || s.back() == '.')) s.pop_back();
        };
        tidy(name);
        tidy(expl);
        if (name.empty()) return std::nullopt;
        out.constraints.emplace_back(name, expl);
    }
    return out;
}

std::optional<Phase2> parse_phase2(const std::string& response) {
    Phase2 out;
    const std::string l4 = find_numbered_line(response, "4)");
    const std::string l5 = find_numbered_line(response, "5)");
    const std::string l6 = find_numbered_line(response, "6)");
    if (l4.empty() || l5.empty() || l6.empty()) return std::nullopt;
    const std::string inputs = bracket_payload(l4);
    out.output_contract = bracket_payload(l5);
    out.objective = bracket_payload(l6);
    if (inputs.empty() || out.output_contract.empty() || out.objective.empty())
        return std::nullopt;
    std::string cur;
    for (char c : inputs + ",") {
        if (c == ',') {
            while (!cur.empty() && cur.front() == ' ') cur.erase(cur.begin());
            while (!cur.empty() && cur.back() == ' ') cur.pop_back();
            if (!cur.empty()) {
                if (cur.find(' ') != std::string::npos) return std::nullopt; // spec: underscores
                out.inputs.push_back(cur);
            }
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (out.inputs.empty()) return std::nullopt;
    return out;
}

} // namespace prompts

// ---------------------------------------------------------------------------
// Agents

namespace {

Transcript::Entry& record(Transcript& t, AgentRole role, std::string prompt,
                          std::string response, int round) {
    t.entries.push_back({role, std::move(prompt), std::move(response), round});
    return t.entries.back();
}

std::string short_name(const std::string& constraint_name) {
    std::string n = constraint_name.substr(0, constraint_name.find('('));
    std::string out;
    for (char c : n) {
        if (std::isalnum(static_cast<unsigned char>(c)) || c == ' ')
            out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    while (!out.empty() && out.back() == ' ') out.pop_back();
    return out;
}

} // namespace

ProblemDescription describe(const std::string& instance_text, Provider& provider,
                            Transcript& transcript, int round, const VariantHints& hints) {
    const std::string hint_block = prompts::hints_text(hints);

    std::optional<prompts::Phase1> p1;
    const std::string prompt1 = prompts::ga_phase1(instance_text, hint_block);
    std::string answer1;
    for (int attempt = 0; attempt < 2 && !p1; ++attempt) {
        answer1 = provider.complete(AgentRole::GA, prompt1);
        record(transcript, AgentRole::GA, prompt1, answer1, round);
        p1 = prompts::parse_phase1(answer1);
    }
    if (!p1) throw ProviderError("unparseable description (phase 1)");

    std::optional<prompts::Phase2> p2;
    const std::string prompt2 = prompts::ga_phase2(answer1, instance_text, hint_block);
    for (int attempt = 0; attempt < 2 && !p2; ++attempt) {
        const std::string answer2 = provider.complete(AgentRole::GA, prompt2);
        record(transcript, AgentRole::GA, prompt2, answer2, round);
        p2 = prompts::parse_phase2(answer2);
    }
    if (!p2) throw ProviderError("unparseable description (phase 2)");

    ProblemDescription desc;
    desc.problem_type = p1->code;
    desc.summary = p1->summary;
    desc.constraints = p1->constraints;
    desc.inputs = p2->inputs;
    desc.output_contract = p2->output_contract;
    desc.objective = p2->objective;
    return desc;
}

Judgment judge_description(const ProblemDescription& desc, const std::string& instance_text,
                           Provider& provider, Transcript& transcript, int round,
                           const VariantHints& hints) {
    const std::string prompt =
        prompts::ja(instance_text, prompts::hints_text(hints), prompts::format_phase1(desc),
                    prompts::format_phase2(desc));
    const std::string response = provider.complete(AgentRole::JA, prompt);
    record(transcript, AgentRole::JA, prompt, response, round);

    auto flag_of = [&](const std::string& prefix) -> std::optional<bool> {
        std::istringstream in(response);
        std::string line;
        while (std::getline(in, line)) {
            const size_t at = line.find(prefix);
            if (at == std::string::npos) continue;
            const std::string rest = line.substr(at + prefix.size());
            if (rest.find("True") != std::string::npos) return true;
            if (rest.find("False") != std::string::npos) return false;
        }
        return std::nullopt;
    };
    auto text_of = [&](const std::string& prefix) -> std::string {
        std::istringstream in(response);
        std::string line;
        while (std::getline(in, line)) {
            const size_t at = line.find(prefix);
            if (at != std::string::npos) {
                std::string rest = line.substr(at + prefix.size());
                while (!rest.empty() && (rest.front() == ' ' || rest.front() == ':'))
                    rest.erase(rest.begin());
                return rest;
            }
        }
        return "";
    };

    const auto r1 = flag_of("right1:");
    const auto r2 = flag_of("right2:");
    if (!r1 || !r2) throw ProviderError("unparseable judgment");
    Judgment j;
    j.part1_ok = *r1;
    j.part2_ok = *r2;
    j.verdict = j.part1_ok && j.part2_ok;
    const std::string jud1 = text_of("jud1:");
    const std::string jud2 = text_of("jud2:");
    j.explanation = j.verdict ? jud1 : (!j.part1_ok ? jud1 : jud2);
    if (!j.verdict) {
        j.suggestions = (!j.part1_ok ? jud1 : "") +
                        (!j.part1_ok && !j.part2_ok ? " | " : "") + (!j.part2_ok ? jud2 : "");
        if (j.explanation.empty()) j.explanation = "judged inconsistent with the instance";
    }
    return j;
}

ProblemDescription revise_description(const ProblemDescription& desc, const Judgment& judgment,
                                      const std::string& instance_text, Provider& provider,
                                      Transcript& transcript, int round,
                                      const VariantHints& hints) {
    ProblemDescription revised = desc;
    const std::string hint_block = prompts::hints_text(hints);
    if (!judgment.part1_ok) {
        const std::string prompt = prompts::ra_phase1(
            instance_text, hint_block, prompts::format_phase1(desc), judgment.suggestions);
        const std::string response = provider.complete(AgentRole::RA, prompt);
        record(transcript, AgentRole::RA, prompt, response, round);
        if (auto p1 = prompts::parse_phase1(response)) {
            revised.problem_type = p1->code;
            revised.summary = p1->summary;
            revised.constraints = p1->constraints;
        } else {
            throw ProviderError("unparseable revision (phase 1)");
        }
    }
    if (!judgment.part2_ok) {
        const std::string prompt = prompts::ra_phase2(
            instance_text, hint_block, prompts::format_phase2(desc), judgment.suggestions);
        const std::string response = provider.complete(AgentRole::RA, prompt);
        record(transcript, AgentRole::RA, prompt, response, round);
        if (auto p2 = prompts::parse_phase2(response)) {
            revised.inputs = p2->inputs;
            revised.output_contract = p2->output_contract;
            revised.objective = p2->objective;
        } else {
            throw ProviderError("unparseable revision (phase 2)");
        }
    }
    return revised;
}

ConstraintSet derive_config(const ProblemDescription& desc, const Instance& inst) {
    const auto code_flags = parse_variant_code(desc.problem_type);
    if (!code_flags)
        throw ConfigError("description names unknown problem type '" + desc.problem_type +
                          "'");

    VariantHints hints;
    hints.open_route = code_flags->open;
    hints.mixed_backhaul = code_flags->mixed_backhaul;
    const VariantSignature derived = classify(inst, hints);

    // Flags implied by the constraint list.
    CodeFlags k;
    bool visit_listed = false;
    for (const auto& [name, expl] : desc.constraints) {
        const std::string n = short_name(name);
        if (n == "capacity") k.capacity = true;
        else if (n == "distance limit" || n == "duration limit") k.distance_limit = true;
        else if (n == "time windows" || n == "time window") k.time_windows = true;
        else if (n == "open route") k.open = true;
        else if (n == "mixed backhaul" || n == "mixture backhaul" || n == "mixed")
            k.mixed_backhaul = true;
        else if (n == "backhaul") k.backhaul = true;
        else if (n == "multi depot" || n == "multidepot") k.multi_depot = true;
        else if (n == "electricity" || n == "electric") k.electric = true;
        else if (n == "precedence") k.precedence = true;
        else if (n == "visit") visit_listed = true;
    }

    std::vector<std::string> diffs;
    auto cmp = [&](const char* what, bool from_code, bool from_k, bool from_inst) {
        if (from_code != from_inst || from_k != from_inst)
            diffs.push_back(std::string(what) + ": description says " +
                            ((from_code || from_k) ? "on" : "off") + ", instance fields say " +
                            (from_inst ? "on" : "off"));
    };
    const ConstraintSet& cs = derived.flags;
    cmp("capacity", code_flags->capacity, k.capacity, cs.capacity_on);
    cmp("distance_limit", code_flags->distance_limit, k.distance_limit, cs.distance_limit_on);
    cmp("time_windows", code_flags->time_windows, k.time_windows, cs.time_windows_on);
    cmp("open_route", code_flags->open, k.open, cs.open_route);
    cmp("backhaul", code_flags->backhaul, k.backhaul, cs.backhaul_on);
    cmp("mixed_backhaul", code_flags->mixed_backhaul, k.mixed_backhaul, cs.mixed_backhaul_on);
    cmp("multi_depot", code_flags->multi_depot, k.multi_depot, cs.multi_depot);
    cmp("electric", code_flags->electric, k.electric, cs.electric_on);
    cmp("precedence", code_flags->precedence, k.precedence, cs.precedence_on);
    if (!visit_listed) diffs.push_back("visit: constraint list omits the visit rule");

    // Inputs must name populated instance fields.
    const std::vector<std::string> expected = canonical_inputs(inst, cs);
    const std::set<std::string> expected_set(expected.begin(), expected.end());
    const std::set<std::string> got(desc.inputs.begin(), desc.inputs.end());
    for (const auto& e : expected_set)
        if (!got.count(e)) diffs.push_back("inputs: missing " + e);
    for (const auto& g : got)
        if (!expected_set.count(g)) diffs.push_back("inputs: " + g + " is not an instance field");

    if (!diffs.empty()) {
        std::string msg = "description/instance mismatch:";
        for (const auto& d : diffs) msg += " " + d + ";";
        throw ConfigError(msg);
    }
    return cs;
}

std::string analyze_failure(const std::string& error_text, const std::string& instance_text,
                            const ProblemDescription& desc, Provider& provider,
                            Transcript& transcript, int round) {
    const std::string prompt = prompts::eaa(
        instance_text, prompts::format_phase1(desc) + prompts::format_phase2(desc), error_text);
    const std::string response = provider.complete(AgentRole::EAA, prompt);
    record(transcript, AgentRole::EAA, prompt, response, round);
    const size_t at = response.find("jud:");
    if (at == std::string::npos) throw ProviderError("unparseable failure analysis");
    std::string text = response.substr(at + 4);
    while (!text.empty() && text.front() == ' ') text.erase(text.begin());
    const size_t nl = text.find('\n');
    if (nl != std::string::npos) text = text.substr(0, nl);
    return text;
}

// ---------------------------------------------------------------------------
// Buffer

namespace {

std::mutex g_buffer_mutex;

json desc_to_json(const ProblemDescription& d) {
    json k = json::array();
    for (const auto& [name, expl] : d.constraints) k.push_back({name, expl});
    return json{{"problem_type", d.problem_type}, {"summary", d.summary},
                {"constraints", k},               {"inputs", d.inputs},
                {"output", d.output_contract},    {"objective", d.objective}};
}

ProblemDescription desc_from_json(const json& j) {
    ProblemDescription d;
    d.problem_type = j.at("problem_type").get<std::string>();
    d.summary = j.at("summary").get<std::string>();
    for (const auto& pair : j.at("constraints"))
        d.constraints.emplace_back(pair.at(0).get<std::string>(), pair.at(1).get<std::string>());
    d.inputs = j.at("inputs").get<std::vector<std::string>>();
    d.output_contract = j.at("output").get<std::string>();
    d.objective = j.at("objective").get<std::string>();
    return d;
}

json flags_to_json(const ConstraintSet& cs) {
    return json{{"capacity", cs.capacity_on},
                {"distance_limit", cs.distance_limit_on},
                {"time_windows", cs.time_windows_on},
                {"open_route", cs.open_route},
                {"multi_depot", cs.multi_depot},
                {"backhaul", cs.backhaul_on},
                {"mixed_backhaul", cs.mixed_backhaul_on},
                {"electric", cs.electric_on},
                {"precedence", cs.precedence_on},
                {"asymmetric", cs.asymmetric}};
}

ConstraintSet flags_from_json(const json& j) {
    ConstraintSet cs;
    cs.capacity_on = j.at("capacity").get<bool>();
    cs.distance_limit_on = j.at("distance_limit").get<bool>();
    cs.time_windows_on = j.at("time_windows").get<bool>();
    cs.open_route = j.at("open_route").get<bool>();
    cs.multi_depot = j.at("multi_depot").get<bool>();
    cs.backhaul_on = j.at("backhaul").get<bool>();
    cs.mixed_backhaul_on = j.at("mixed_backhaul").get<bool>();
    cs.electric_on = j.at("electric").get<bool>();
    cs.precedence_on = j.at("precedence").get<bool>();
    cs.asymmetric = j.at("asymmetric").get<bool>();
    return cs;
}

} // namespace

Buffer::Buffer(std::string path) : path_(std::move(path)) {
    std::ifstream in(path_);
    if (!in.is_open()) return;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded()) continue; // tolerate torn tail lines
        BufferEntry e;
        e.signature = j.at("signature").get<std::string>();
        e.description = desc_from_json(j.at("description"));
        e.config = flags_from_json(j.at("config"));
        e.created_at = j.at("created_at").get<std::int64_t>();
        e.hit_count = j.at("hit_count").get<int>();
        std::erase_if(entries_, [&](const BufferEntry& x) { return x.signature == e.signature; });
        entries_.push_back(std::move(e));
    }
}

const BufferEntry* Buffer::find(const std::string& signature) const {
    for (const auto& e : entries_)
        if (e.signature == signature) return &e;
    return nullptr;
}

void Buffer::store(const BufferEntry& entry) {
    std::lock_guard<std::mutex> lock(g_buffer_mutex);
    std::erase_if(entries_,
                  [&](const BufferEntry& x) { return x.signature == entry.signature; });
    entries_.push_back(entry);
    if (path_.empty()) return;
    json j{{"signature", entry.signature},
           {"description", desc_to_json(entry.description)},
           {"config", flags_to_json(entry.config)},
           {"created_at", entry.created_at},
           {"hit_count", entry.hit_count}};
    std::ofstream out(path_, std::ios::app);
    out << j.dump() << "\n";
}

std::string description_signature(const ProblemDescription& desc) {
    std::vector<std::string> names;
    for (const auto& [name, expl] : desc.constraints) names.push_back(short_name(name));
    std::sort(names.begin(), names.end());
    std::vector<std::string> inputs = desc.inputs;
    std::sort(inputs.begin(), inputs.end());
    std::string blob = desc.problem_type + "|";
    for (const auto& n : names) blob += n + ",";
    blob += "|";
    for (const auto& i : inputs) blob += i + ",";
    std::uint64_t h = 1469598103934665603ull; // FNV-1a
    for (unsigned char c : blob) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char hex[17];
    snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(h));
    return desc.problem_type + ":" + hex;
}

std::string Transcript::to_text() const {
    std::ostringstream out;
    for (const auto& e : entries) {
        out << "=== round " << e.round << " " << to_string(e.role) << " ===\n";
        out << "--- prompt ---\n" << e.prompt;
        if (!e.prompt.ends_with('\n')) out << "\n";
        out << "--- response ---\n" << e.response;
        if (!e.response.ends_with('\n')) out << "\n";
    }
    return out.str();
}

// ---------------------------------------------------------------------------
// End-to-end run

namespace {

// Accumulates provider latency so solver timing can exclude it.
class TimedProvider : public Provider {
public:
    TimedProvider(Provider& inner, double& sink) : inner_(inner), sink_(sink) {}
    std::string complete(AgentRole role, const std::string& prompt) override {
        const auto t0 = std::chrono::steady_clock::now();
        std::string out = inner_.complete(role, prompt);
        sink_ += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        return out;
    }

private:
    Provider& inner_;
    double& sink_;
};

} // namespace

PipelineResult run_pipeline(const std::string& instance_text, const PipelineOptions& opts,
                            Provider& raw_provider, Buffer& buffer) {
    PipelineResult result;
    TimedProvider provider(raw_provider, result.provider_time_s);
    const int max_rounds = std::max(1, opts.provider.max_rounds);

    // Fail-fast precondition: unparseable instances never reach an agent.
    const Instance inst = parse_instance(instance_text);
    const Rounding rounding = opts.rounding.value_or(default_rounding(inst));
    const DistanceMatrix dm = build_distance_matrix(inst, rounding);

    auto fail = [&](std::string why) {
        result.success = false;
        result.failure = std::move(why);
        return result;
    };

    try {
        result.description = describe(instance_text, provider, result.transcript, 1, opts.hints);
        result.signature = description_signature(result.description);

        ConstraintSet cs;
        bool have_config = false;
        std::int64_t created_at = static_cast<std::int64_t>(std::time(nullptr));
        int hit_count = 0;

        if (const BufferEntry* hit = buffer.find(result.signature)) {
            // Variant already validated: reuse its configuration shape, rebind
            // parameters from this instance, and skip the judgment loop.
            const auto flags = parse_variant_code(hit->description.problem_type);
            VariantHints hints;
            if (flags) {
                hints.open_route = flags->open;
                hints.mixed_backhaul = flags->mixed_backhaul;
            }
            const VariantSignature sig = classify(inst, hints);
            if (sig.flags.flags_equal(hit->config)) {
                cs = sig.flags;
                have_config = true;
                result.buffer_hit = true;
                created_at = hit->created_at;
                hit_count = hit->hit_count + 1;
            }
        }

        if (!have_config) {
            int round = 1;
            while (true) {
                Judgment judgment = judge_description(result.description, instance_text,
                                                      provider, result.transcript, round,
                                                      opts.hints);
                if (judgment.verdict) {
                    try {
                        cs = derive_config(result.description, inst);
                        have_config = true;
                        break;
                    } catch (const ConfigError& e) {
                        judgment.verdict = false;
                        judgment.part1_ok = false;
                        judgment.part2_ok = false;
                        judgment.explanation = e.what();
                        judgment.suggestions = e.what();
                    }
                }
                if (round >= max_rounds)
                    return fail("description not accepted after " + std::to_string(round) +
                                " round(s): " + judgment.explanation);
                result.description =
                    revise_description(result.description, judgment, instance_text, provider,
                                       result.transcript, round, opts.hints);
                result.signature = description_signature(result.description);
                ++round;
            }
        }

        for (int attempt = 1; attempt <= max_rounds; ++attempt) {
            std::string error_text;
            try {
                auto [solution, stats] = solve(inst, cs, dm, opts.solver);
                const FeasibilityReport report = check_solution(solution, inst, cs, dm);
                if (!report.feasible)
                    throw SolverDefect("final solution failed validation:\n" +
                                       report.to_text());
                result.solution = std::move(solution);
                result.stats = std::move(stats);
                result.success = true;
                BufferEntry entry{result.signature, result.description, cs, created_at,
                                  hit_count};
                buffer.store(entry);
                return result;
            } catch (const ConstructionError& e) {
                error_text = std::string("construction failure: ") + e.what();
            } catch (const SolverDefect& e) {
                error_text = std::string("internal validation defect: ") + e.what();
            }

            if (attempt == max_rounds)
                return fail("solving failed after " + std::to_string(attempt) +
                            " attempt(s): " + error_text);

            std::string suggestion;
            try {
                suggestion = analyze_failure(error_text, instance_text, result.description,
                                             provider, result.transcript, attempt);
            } catch (const ProviderError&) {
                // Degraded mode: no analysis available, fall back to one blind
                // re-derivation from the instance fields.
                suggestion = "analysis unavailable; re-derive the description from the "
                             "instance fields";
            }
            Judgment judgment;
            judgment.verdict = false;
            judgment.part1_ok = false;
            judgment.part2_ok = false;
            judgment.explanation = error_text;
            judgment.suggestions = suggestion;
            result.description =
                revise_description(result.description, judgment, instance_text, provider,
                                   result.transcript, attempt, opts.hints);
            result.signature = description_signature(result.description);
            const Judgment re_judged =
                judge_description(result.description, instance_text, provider,
                                  result.transcript, attempt, opts.hints);
            if (re_judged.verdict) {
                try {
                    cs = derive_config(result.description, inst);
                } catch (const ConfigError&) {
                    // Keep the previous configuration; the next attempt reports
                    // the persistent mismatch if solving fails again.
                }
            }
        }
        return fail("exhausted revision rounds");
    } catch (const ProviderError& e) {
        return fail(std::string("provider failure: ") + e.what());
    }
}

} // namespace vrpkit
