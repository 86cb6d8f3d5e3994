#include "vrpkit/providers.hpp"

#include <chrono>
#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "vrpkit/errors.hpp"
#include "vrpkit/pipeline.hpp"

namespace vrpkit {

using nlohmann::json;

std::string to_string(AgentRole role) {
    switch (role) {
        case AgentRole::GA: return "GA";
        case AgentRole::JA: return "JA";
        case AgentRole::RA: return "RA";
        case AgentRole::EAA: return "EAA";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// Rule-based provider

namespace {

std::string task_code(const std::string& prompt) {
    const std::string tag = "Task code: ";
    const size_t at = prompt.find(tag);
    if (at == std::string::npos) return "";
    const size_t end = prompt.find('\n', at);
    return prompt.substr(at + tag.size(), end - at - tag.size());
}

ProblemDescription canonical_description(const Instance& inst, const ConstraintSet& cs) {
    ProblemDescription d;
    d.problem_type = variant_code(cs);
    d.summary = canonical_summary(cs);
    d.constraints = canonical_constraints(cs);
    d.inputs = canonical_inputs(inst, cs);
    d.output_contract = canonical_output_contract(cs);
    d.objective = canonical_objective();
    return d;
}

std::vector<std::string> sorted_short_names(
    const std::vector<std::pair<std::string, std::string>>& constraints) {
    std::vector<std::string> names;
    for (const auto& [name, expl] : constraints) {
        std::string n = name.substr(0, name.find('('));
        std::string out;
        for (char c : n)
            if (std::isalnum(static_cast<unsigned char>(c)) || c == ' ')
                out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        while (!out.empty() && out.back() == ' ') out.pop_back();
        names.push_back(out);
    }
    std::sort(names.begin(), names.end());
    return names;
}

std::string judge_answers(const Instance& inst, const ConstraintSet& cs,
                          const std::string& answer1, const std::string& answer2) {
    const ProblemDescription truth = canonical_description(inst, cs);

    bool right1 = true;
    std::string jud1 = "description, constraints and type code match the instance fields";
    const auto p1 = prompts::parse_phase1(answer1);
    if (!p1) {
        right1 = false;
        jud1 = "the first answer does not follow the three-line format";
    } else if (p1->code != truth.problem_type) {
        right1 = false;
        jud1 = "the type code '" + p1->code + "' conflicts with the instance fields, which "
               "imply '" + truth.problem_type + "'; use the field-derived code";
    } else if (sorted_short_names(p1->constraints) != sorted_short_names(truth.constraints)) {
        right1 = false;
        jud1 = "the constraint list does not match the instance fields; expected:";
        for (const auto& [name, expl] : truth.constraints) jud1 += " " + name + ";";
    }

    bool right2 = true;
    std::string jud2 = "inputs, output and objective are consistent with the instance";
    const auto p2 = prompts::parse_phase2(answer2);
    if (!p2) {
        right2 = false;
        jud2 = "the second answer does not follow the three-line format";
    } else {
        std::vector<std::string> want = truth.inputs, got = p2->inputs;
        std::sort(want.begin(), want.end());
        std::sort(got.begin(), got.end());
        if (want != got) {
            right2 = false;
            jud2 = "the input list is wrong:";
            for (const auto& w : want)
                if (!std::binary_search(got.begin(), got.end(), w))
                    jud2 += " it omits " + w + " from the input;";
            for (const auto& g : got)
                if (!std::binary_search(want.begin(), want.end(), g))
                    jud2 += " " + g + " is not provided by the instance;";
        }
    }

    return "1) right1: " + std::string(right1 ? "True" : "False") + "\n2) jud1: " + jud1 +
           "\n3) right2: " + std::string(right2 ? "True" : "False") + "\n4) jud2: " + jud2 +
           "\n";
}

std::string canned_error_analysis(const std::string& error_text) {
    auto contains = [&](const char* needle) {
        return error_text.find(needle) != std::string::npos;
    };
    std::string why;
    if (contains("timed out") || contains("time limit") || contains("time budget"))
        why = "the algorithm timed out; reduce the iteration count or destroy ratio so the "
              "search fits the time budget";
    else if (contains("Capacity"))
        why = "a capacity violation slipped through; verify the capacity flag and the demand "
              "parsing against the instance fields";
    else if (contains("TimeWindow"))
        why = "a time-window violation slipped through; verify the window and service-time "
              "bindings against the instance";
    else if (contains("BackhaulOrder"))
        why = "the strict-versus-mixed backhaul choice looks inconsistent with the instance; "
              "re-check the declared type hint rather than switching models blindly";
    else if (contains("Electric") || contains("fuel"))
        why = "fuel feasibility failed; verify the energy parameters and station list, and "
              "allow charging stops on long legs";
    else if (contains("construction failure"))
        why = "some customer cannot be served even alone; re-derive the constraint parameters "
              "(capacity, windows, fuel) from the instance, the configuration may be "
              "misclassified";
    else
        why = "re-derive the description and constraint set from the instance fields before "
              "solving again";
    return "jud: " + why + "\n";
}

} // namespace

std::string RuleBasedProvider::complete(AgentRole role, const std::string& prompt) {
    const std::string task = task_code(prompt);
    const std::string instance_text = prompts::extract_block(prompt, "INSTANCE");
    if (task.empty() || instance_text.empty())
        throw ProviderError("rule-based provider: prompt carries no instance block");

    if (task == "ERROR") {
        (void)role;
        return canned_error_analysis(prompts::extract_block(prompt, "ERROR"));
    }

    const VariantHints hints = prompts::parse_hints(prompts::extract_block(prompt, "HINTS"));
    const Instance inst = parse_instance(instance_text);
    const ConstraintSet cs = classify(inst, hints).flags;

    if (task == "P1" || task == "R1")
        return prompts::format_phase1(canonical_description(inst, cs));
    if (task == "P2" || task == "R2")
        return prompts::format_phase2(canonical_description(inst, cs));
    if (task == "JUDGE")
        return judge_answers(inst, cs, prompts::extract_block(prompt, "FIRST ANSWER"),
                             prompts::extract_block(prompt, "SECOND ANSWER"));
    throw ProviderError("rule-based provider: unknown task code '" + task + "'");
}

// ---------------------------------------------------------------------------
// Remote provider

namespace {

struct ParsedUrl {
    std::string base; // scheme://host[:port]
    std::string path;
};

ParsedUrl split_url(const std::string& url) {
    const size_t scheme = url.find("://");
    if (scheme == std::string::npos)
        throw ConfigError("endpoint '" + url + "' has no scheme");
    const size_t path_at = url.find('/', scheme + 3);
    if (path_at == std::string::npos) return {url, ""};
    return {url.substr(0, path_at), url.substr(path_at)};
}

} // namespace

RemoteProvider::RemoteProvider(const ProviderConfig& cfg) : cfg_(cfg) {
    if (cfg_.endpoint.empty()) throw ConfigError("remote provider needs an endpoint");
    if (cfg_.model.empty()) throw ConfigError("remote provider needs a model name");
    if (cfg_.api_key_env.empty())
        throw ConfigError("remote provider needs an API key environment variable name");
    const char* key = std::getenv(cfg_.api_key_env.c_str());
    if (key == nullptr || *key == '\0')
        throw ConfigError("environment variable '" + cfg_.api_key_env + "' is not set");
    api_key_ = key;
}

std::string RemoteProvider::complete(AgentRole /*role*/, const std::string& prompt) {
    const ParsedUrl url = split_url(cfg_.endpoint);
    std::string path = url.path;
    while (!path.empty() && path.back() == '/') path.pop_back();
    if (!path.ends_with("/chat/completions")) path += "/chat/completions";

    const json body{{"model", cfg_.model},
                    {"messages", json::array({json{{"role", "user"}, {"content", prompt}}})},
                    {"temperature", 0}};
    const httplib::Headers headers{{"Authorization", "Bearer " + api_key_}};

    std::string last_error;
    for (int attempt = 1; attempt <= 3; ++attempt) {
        httplib::Client client(url.base);
        client.set_connection_timeout(std::chrono::duration<double>(cfg_.timeout_s));
        client.set_read_timeout(std::chrono::duration<double>(cfg_.timeout_s));
        auto res = client.Post(path, headers, body.dump(), "application/json");
        if (!res) {
            last_error = "transport error: " + httplib::to_string(res.error());
        } else if (res->status == 429 || res->status >= 500) {
            last_error = "HTTP " + std::to_string(res->status);
        } else if (res->status != 200) {
            throw ProviderError("HTTP " + std::to_string(res->status) + ": " +
                                res->body.substr(0, 200));
        } else {
            json j = json::parse(res->body, nullptr, false);
            if (j.is_discarded()) throw ProviderError("response is not JSON");
            try {
                return j.at("choices").at(0).at("message").at("content").get<std::string>();
            } catch (const json::exception& e) {
                throw ProviderError(std::string("unexpected response shape: ") + e.what());
            }
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(200 * attempt));
    }
    throw ProviderError("remote provider unreachable: " + last_error);
}

std::string ScriptedProvider::complete(AgentRole /*role*/, const std::string& /*prompt*/) {
    if (next_ >= responses_.size()) throw ProviderError("scripted provider: script exhausted");
    return responses_[next_++];
}

std::unique_ptr<Provider> make_provider(const ProviderConfig& cfg) {
    switch (cfg.kind) {
        case ProviderConfig::Kind::RuleBased: return std::make_unique<RuleBasedProvider>();
        case ProviderConfig::Kind::Remote: return std::make_unique<RemoteProvider>(cfg);
    }
    throw ConfigError("unknown provider kind");
}

} // namespace vrpkit
