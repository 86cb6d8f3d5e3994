#pragma once

#include <memory>
#include <string>
#include <vector>

namespace vrpkit {

enum class AgentRole { GA, JA, RA, EAA };
std::string to_string(AgentRole role);

struct ProviderConfig {
    enum class Kind { RuleBased, Remote };
    Kind kind = Kind::RuleBased;
    std::string endpoint;    // chat-completion base URL (remote only)
    std::string model;       // model name sent in the request body
    std::string api_key_env; // environment variable holding the API key
    int max_rounds = 5;      // cap on every agent loop
    double timeout_s = 60.0;
};

// A text-model endpoint: one prompt in, one completion out. The pipeline's
// control flow is identical for every implementation.
class Provider {
public:
    virtual ~Provider() = default;
    virtual std::string complete(AgentRole role, const std::string& prompt) = 0;
};

// Deterministic offline provider: answers every prompt by re-deriving the
// ground truth from the instance text embedded in it, in the exact output
// format the pipeline parses.
class RuleBasedProvider : public Provider {
public:
    std::string complete(AgentRole role, const std::string& prompt) override;
};

// OpenAI-style chat-completion client over HTTP(S), temperature 0. The API
// key is read from the configured environment variable at construction;
// a missing key fails immediately, before any network traffic.
class RemoteProvider : public Provider {
public:
    explicit RemoteProvider(const ProviderConfig& cfg);
    std::string complete(AgentRole role, const std::string& prompt) override;

private:
    ProviderConfig cfg_;
    std::string api_key_;
};

// Test double replaying canned responses in order; throws ProviderError when
// the script runs out.
class ScriptedProvider : public Provider {
public:
    explicit ScriptedProvider(std::vector<std::string> responses)
        : responses_(std::move(responses)) {}
    std::string complete(AgentRole role, const std::string& prompt) override;
    size_t calls() const { return next_; }

private:
    std::vector<std::string> responses_;
    size_t next_ = 0;
};

std::unique_ptr<Provider> make_provider(const ProviderConfig& cfg);

} // namespace vrpkit
