#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "vrpkit/constraints.hpp"
#include "vrpkit/instance.hpp"
#include "vrpkit/providers.hpp"
#include "vrpkit/solution.hpp"
#include "vrpkit/solver.hpp"

namespace vrpkit {

// The six-field problem record the agents produce and judge.
struct ProblemDescription {
    std::string problem_type;                                     // P
    std::string summary;                                          // S
    std::vector<std::pair<std::string, std::string>> constraints; // K: (name, explanation)
    std::vector<std::string> inputs;                              // X, underscore names
    std::string output_contract;                                  // Y
    std::string objective;                                        // Z
};

struct Judgment {
    bool verdict = false;
    std::string explanation;
    std::string suggestions;
    // Which half failed (description/constraints/name vs input/output/objective);
    // drives which phase the revision re-issues.
    bool part1_ok = true;
    bool part2_ok = true;
};

struct BufferEntry {
    std::string signature;
    ProblemDescription description;
    ConstraintSet config; // flag shape; parameters are rebound per instance
    std::int64_t created_at = 0;
    int hit_count = 0;
};

struct Transcript {
    struct Entry {
        AgentRole role;
        std::string prompt;
        std::string response;
        int round = 0;
    };
    std::vector<Entry> entries;
    std::string to_text() const;
};

// Persistent variant cache: line-delimited JSON, append-only, last entry per
// signature wins on load. Appends are serialized in-process.
class Buffer {
public:
    Buffer() = default; // in-memory only
    explicit Buffer(std::string path);
    const BufferEntry* find(const std::string& signature) const;
    void store(const BufferEntry& entry);
    size_t size() const { return entries_.size(); }

private:
    std::string path_;
    std::vector<BufferEntry> entries_;
};

// Pure function of (P, K, X): canonical code plus a hash of the sorted
// constraint and input names. Two instances of one variant share it.
std::string description_signature(const ProblemDescription& desc);

// Canonical description fields derived from a classified instance; the
// rule-based provider and the conformance checks share these.
std::vector<std::string> canonical_inputs(const Instance& inst, const ConstraintSet& cs);
std::vector<std::pair<std::string, std::string>> canonical_constraints(const ConstraintSet& cs);
std::string canonical_summary(const ConstraintSet& cs);
std::string canonical_output_contract(const ConstraintSet& cs);
std::string canonical_objective();

// Prompt builders (shared by the pipeline and the rule-based provider's
// prompt introspection). Fenced blocks carry the data each agent needs;
// hints_text carries caller-forced facts the file format cannot express
// ("open_route=true"), empty when none.
namespace prompts {
std::string ga_phase1(const std::string& instance_text, const std::string& hints_text);
std::string ga_phase2(const std::string& phase1_answer, const std::string& instance_text,
                      const std::string& hints_text);
std::string ja(const std::string& instance_text, const std::string& hints_text,
               const std::string& answer1, const std::string& answer2);
std::string ra_phase1(const std::string& instance_text, const std::string& hints_text,
                      const std::string& previous, const std::string& issues);
std::string ra_phase2(const std::string& instance_text, const std::string& hints_text,
                      const std::string& previous, const std::string& issues);
std::string eaa(const std::string& instance_text, const std::string& description,
                const std::string& error_text);
std::string extract_block(const std::string& prompt, const std::string& tag);
std::string hints_text(const VariantHints& hints);

std::string format_phase1(const ProblemDescription& desc);
std::string format_phase2(const ProblemDescription& desc);

struct Phase1 {
    std::string summary;
    std::vector<std::pair<std::string, std::string>> constraints;
    std::string code;
};
struct Phase2 {
    std::vector<std::string> inputs;
    std::string output_contract;
    std::string objective;
};
std::optional<Phase1> parse_phase1(const std::string& response);
std::optional<Phase2> parse_phase2(const std::string& response);
VariantHints parse_hints(const std::string& hints_text);
} // namespace prompts

// Two GA phases -> parsed six-field description. One re-ask per phase on a
// format violation, then ProviderError.
ProblemDescription describe(const std::string& instance_text, Provider& provider,
                            Transcript& transcript, int round = 1,
                            const VariantHints& hints = {});

Judgment judge_description(const ProblemDescription& desc, const std::string& instance_text,
                           Provider& provider, Transcript& transcript, int round,
                           const VariantHints& hints = {});

ProblemDescription revise_description(const ProblemDescription& desc, const Judgment& judgment,
                                      const std::string& instance_text, Provider& provider,
                                      Transcript& transcript, int round,
                                      const VariantHints& hints = {});

// Maps the accepted description onto a ConstraintSet bound to this instance.
// Throws ConfigError when the description and the field-derived classification
// disagree on any flag (the caller turns that into another judgment round).
ConstraintSet derive_config(const ProblemDescription& desc, const Instance& inst);

std::string analyze_failure(const std::string& error_text, const std::string& instance_text,
                            const ProblemDescription& desc, Provider& provider,
                            Transcript& transcript, int round);

struct PipelineOptions {
    ProviderConfig provider;
    SolverConfig solver;
    VariantHints hints;                // CLI overrides for open / mixed-backhaul
    std::optional<Rounding> rounding;  // default: per-instance convention
};

struct PipelineResult {
    bool success = false;
    std::string failure; // set when !success
    Solution solution;
    SearchStats stats;
    Transcript transcript;
    ProblemDescription description;
    std::string signature;
    bool buffer_hit = false;
    double provider_time_s = 0.0;
};

// Fig-style end-to-end run: describe -> judge/revise until accepted -> buffer
// lookup -> config derivation -> solve, with failure analysis feeding revision
// rounds. Round-exhaustion is a structured failure (transcript intact), not an
// exception; unreadable/unparseable instance text throws before any agent runs.
PipelineResult run_pipeline(const std::string& instance_text, const PipelineOptions& opts,
                            Provider& provider, Buffer& buffer);

} // namespace vrpkit
