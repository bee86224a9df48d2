// Copyright 2026 The ibvo Authors
// SPDX-License-Identifier: Apache-2.0
//
// Strict JSON field readers. Every error names the full key path, e.g.
// "model.latent_dim: expected a positive integer".

#pragma once

#include <cstdint>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <string_view>
#include <type_traits>

#include "json.hpp"

namespace ibvo {

using Json = nlohmann::json;

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Rejects keys of `obj` not listed in `allowed`.
void reject_unknown_keys(const Json& obj, const std::string& where,
                         std::initializer_list<std::string_view> allowed);

/// Requires `j` to be an object.
const Json& require_object(const Json& j, const std::string& where);

static_assert(std::is_same_v<std::size_t, std::uint64_t>, "seeds are read as size_t");

// Readers leave `out` unchanged when the key is absent.
void read_field(const Json& obj, const std::string& where, const char* key, double& out);
void read_field(const Json& obj, const std::string& where, const char* key, std::size_t& out);
void read_field(const Json& obj, const std::string& where, const char* key, int& out);
void read_field(const Json& obj, const std::string& where, const char* key, bool& out);
void read_field(const Json& obj, const std::string& where, const char* key, std::string& out);

}  // namespace ibvo
