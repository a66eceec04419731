#include "relanno/pipeline.hpp"

namespace relanno::orchestrator {

namespace {

nlohmann::ordered_json mock_backend(const std::string& name, const std::string& style, const std::string& pricing,
                                    const double (&accuracy)[6], double hallucination, double blank, double seconds,
                                    std::uint64_t seed)
{
    nlohmann::ordered_json per_variant = nlohmann::ordered_json::object();
    for (std::size_t i = 0; i < prompting::kAllVariants.size(); ++i)
        per_variant[std::string(prompting::to_string(prompting::kAllVariants[i]))] = {
            {"accuracy", accuracy[i]}, {"hallucination_rate", hallucination}, {"blank_rate", blank}};
    return {{"name", name},
            {"style", style},
            {"mock",
             {{"accuracy", accuracy[1]},
              {"hallucination_rate", hallucination},
              {"blank_rate", blank},
              {"per_variant", per_variant},
              {"seed", seed},
              {"seconds_per_call", seconds}}},
            {"temperature", 0.2},
            {"seed", 7},
            {"max_parallel", 4},
            {"pricing", pricing}};
}

} // namespace

nlohmann::ordered_json demo_backends()
{
    // simple, full_instruction, one_shot, five_shot, one_shot_cot, five_shot_cot
    const double gpt4[6] = {0.634, 0.646, 0.601, 0.638, 0.584, 0.654};
    const double palm2[6] = {0.539, 0.538, 0.601, 0.592, 0.559, 0.572};
    const double mpt[6] = {0.219, 0.276, 0.180, 0.367, 0.185, 0.361};
    return nlohmann::ordered_json::array({
        mock_backend("gpt4-mock", "gpt4", "gpt4", gpt4, 0.10, 0.0, 2.0, 11),
        mock_backend("palm2-mock", "palm2", "palm2", palm2, 0.15, 0.0, 1.5, 12),
        mock_backend("mpt-mock", "mpt_instruct", "mpt_p3_2xlarge", mpt, 0.30, 0.005, 1.2, 13),
    });
}

} // namespace relanno::orchestrator
