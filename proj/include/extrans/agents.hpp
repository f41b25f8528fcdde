#pragma once

#include <array>
#include <optional>
#include <string_view>

namespace extrans {

/// Response sources compared in the analysis. Order matters: it is the
/// row-block and column order of the OLS design.
enum class Agent { kHuman, kVOne, kResNet101, kResNet50 };

inline constexpr std::array<Agent, 4> kAllAgents = {Agent::kHuman, Agent::kVOne,
                                                    Agent::kResNet101, Agent::kResNet50};
inline constexpr std::array<Agent, 3> kNetworkAgents = {Agent::kVOne, Agent::kResNet101,
                                                        Agent::kResNet50};

/// Fixture identifier: human, vone, resnet101, resnet50.
constexpr std::string_view agent_id(Agent agent) noexcept {
  switch (agent) {
    case Agent::kHuman: return "human";
    case Agent::kVOne: return "vone";
    case Agent::kResNet101: return "resnet101";
    case Agent::kResNet50: return "resnet50";
  }
  return "?";
}

/// Report label: Humans, VOneResNet50, ResNet101, ResNet50.
constexpr std::string_view agent_label(Agent agent) noexcept {
  switch (agent) {
    case Agent::kHuman: return "Humans";
    case Agent::kVOne: return "VOneResNet50";
    case Agent::kResNet101: return "ResNet101";
    case Agent::kResNet50: return "ResNet50";
  }
  return "?";
}

inline std::optional<Agent> parse_agent(std::string_view id) noexcept {
  for (Agent a : kAllAgents) {
    if (agent_id(a) == id) return a;
  }
  return std::nullopt;
}

}  // namespace extrans
