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

#include <cstddef>
#include <stdexcept>
#include <string>

namespace abasim {

// Malformed input that could not be decoded (bad JSON, truncated record).
class ParseError : public std::runtime_error {
 public:
  explicit ParseError(const std::string& message, std::size_t line = 0)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + message : message),
        line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Structurally valid input that violates a domain rule.
class ValidationError : public std::runtime_error {
 public:
  ValidationError(std::string entity_id, std::string rule, const std::string& message)
      : std::runtime_error("'" + entity_id + "' violates " + rule + ": " + message),
        entity_id_(std::move(entity_id)),
        rule_(std::move(rule)) {}

  const std::string& entity_id() const { return entity_id_; }
  const std::string& rule() const { return rule_; }

 private:
  std::string entity_id_;
  std::string rule_;
};

// Caller passed an argument outside the documented domain.
class ArgumentError : public std::invalid_argument {
 public:
  explicit ArgumentError(const std::string& message) : std::invalid_argument(message) {}
};

// Text-generation backend failed (network, provider status, exhausted script).
class BackendError : public std::runtime_error {
 public:
  explicit BackendError(const std::string& message, int status = 0)
      : std::runtime_error(message), status_(status) {}

  int status() const { return status_; }

 private:
  int status_;
};

// Model output carried no payload matching the requested schema.
class FormatError : public std::runtime_error {
 public:
  explicit FormatError(const std::string& message) : std::runtime_error(message) {}
};

// Model output carried a label outside the closed alphabet.
class LabelError : public std::runtime_error {
 public:
  explicit LabelError(std::string label, const std::string& alphabet)
      : std::runtime_error("unknown " + alphabet + " label: '" + label + "'"),
        label_(std::move(label)) {}

  const std::string& label() const { return label_; }

 private:
  std::string label_;
};

// An invariant the engine itself guarantees was observed broken.
class InternalError : public std::logic_error {
 public:
  explicit InternalError(const std::string& message) : std::logic_error(message) {}
};

}  // namespace abasim
