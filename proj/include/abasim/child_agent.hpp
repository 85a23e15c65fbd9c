/*
 * Copyright 2026 The Abasim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "abasim/backend.hpp"
#include "abasim/behavior_model.hpp"
#include "abasim/dialogue.hpp"
#include "abasim/prompt_context.hpp"
#include "abasim/rng.hpp"

namespace abasim {

// One child's session: samples behavior from the fitted model and realizes
// it as text through the backend. The model is shared read-only; the random
// stream belongs to this session alone.
class ChildAgent {
 public:
  ChildAgent(const BehaviorModel& model, std::string child_id, ChildProfile profile,
             TextBackend& backend, const PromptLibrary& prompts, std::string topic,
             std::uint64_t seed)
      : model_(&model),
        child_id_(std::move(child_id)),
        profile_(std::move(profile)),
        backend_(&backend),
        prompts_(&prompts),
        topic_(std::move(topic)),
        rng_(seed) {}

  const std::string& child_id() const { return child_id_; }
  const std::string& topic() const { return topic_; }
  Rng& rng() { return rng_; }

  void reseed(std::uint64_t seed) { rng_ = Rng(seed); }

  // Bernoulli draw on whether the child seizes the floor after a
  // non-directive doctor action. Calling this after a directive action is a
  // caller bug: directive actions cue the child unconditionally.
  bool decide_interrupt(Strategy last_strategy) {
    if (!is_non_directive(last_strategy)) {
      throw ArgumentError("interruption gate applies only after non-directive strategies");
    }
    return rng_.bernoulli(interrupt_probability(*model_, child_id_));
  }

  // Samples the response type from the blended, backed-off conditional
  // distribution for the given strategy context.
  ResponseType sample_response_type(std::span<const Strategy> ctx) {
    ResponseDistribution dist = response_distribution_lookup(*model_, ctx, child_id_);
    return kResponseTypes[rng_.categorical(std::span<const double>(dist.data(), dist.size()))];
  }

  // Realizes a sampled response type as text. Unresponsive turns stay silent
  // without touching the backend; the sampled label is authoritative and the
  // generated text cannot change it.
  ChildTurn generate_response(ResponseType type, const std::vector<Turn>& history) {
    ChildTurn turn;
    turn.response_type = type;
    if (type == ResponseType::Unresponsive) return turn;

    GenerationRequest request;
    request.phase = make_child_phase(type);
    request.params = params_;
    request.system_prompt = prompts_->render(
        request.phase, {{"topic", topic_},
                        {"history", history_text(history)},
                        {"profile", profile_text(profile_)},
                        {"response_type", to_label(type)}});
    request.messages = history_messages(history);
    nlohmann::ordered_json marker;
    marker["response_type"] = to_label(type);
    request.messages.push_back({"user", marker.dump()});

    std::string text = trim(backend_->complete(request).text);
    if (text.empty()) {
      request.messages.push_back({"user", kRetryNote});
      text = trim(backend_->complete(request).text);
    }
    if (text.empty()) throw FormatError("empty generation for " + request.phase);
    turn.text = std::move(text);
    return turn;
  }

  void set_params(GenerationParams params) { params_ = params; }

 private:
  const BehaviorModel* model_;
  std::string child_id_;
  ChildProfile profile_;
  TextBackend* backend_;
  const PromptLibrary* prompts_;
  std::string topic_;
  Rng rng_;
  GenerationParams params_{0.7, 128, std::nullopt};
};

}  // namespace abasim
