// Copyright 2026 The ibvo Authors
// SPDX-License-Identifier: Apache-2.0

#include "ibvo/json_util.hpp"

#include <algorithm>
#include <cmath>

namespace ibvo {

namespace {

std::string path_of(const std::string& where, const char* key) {
  return where.empty() ? std::string(key) : where + "." + key;
}

const Json* lookup(const Json& obj, const char* key) {
  auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

}  // namespace

const Json& require_object(const Json& j, const std::string& where) {
  if (!j.is_object()) {
    throw ConfigError((where.empty() ? std::string("config") : where) + ": expected an object");
  }
  return j;
}

void reject_unknown_keys(const Json& obj, const std::string& where,
                         std::initializer_list<std::string_view> allowed) {
  require_object(obj, where);
  for (const auto& [key, _] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ConfigError(path_of(where, key.c_str()) + ": unknown key");
    }
  }
}

void read_field(const Json& obj, const std::string& where, const char* key, double& out) {
  const Json* v = lookup(obj, key);
  if (!v) return;
  if (!v->is_number() || !std::isfinite(v->get<double>())) {
    throw ConfigError(path_of(where, key) + ": expected a finite number");
  }
  out = v->get<double>();
}

void read_field(const Json& obj, const std::string& where, const char* key, std::size_t& out) {
  const Json* v = lookup(obj, key);
  if (!v) return;
  if (!v->is_number_unsigned()) {
    throw ConfigError(path_of(where, key) + ": expected a non-negative integer");
  }
  out = v->get<std::size_t>();
}

void read_field(const Json& obj, const std::string& where, const char* key, int& out) {
  const Json* v = lookup(obj, key);
  if (!v) return;
  if (!v->is_number_integer()) throw ConfigError(path_of(where, key) + ": expected an integer");
  out = v->get<int>();
}

void read_field(const Json& obj, const std::string& where, const char* key, bool& out) {
  const Json* v = lookup(obj, key);
  if (!v) return;
  if (!v->is_boolean()) throw ConfigError(path_of(where, key) + ": expected true or false");
  out = v->get<bool>();
}

void read_field(const Json& obj, const std::string& where, const char* key, std::string& out) {
  const Json* v = lookup(obj, key);
  if (!v) return;
  if (!v->is_string()) throw ConfigError(path_of(where, key) + ": expected a string");
  out = v->get<std::string>();
}

}  // namespace ibvo
