#pragma once

#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace roboecon {

/// Integer currency amount in cents.
using Cents = std::int64_t;

enum class AccountKind { Human, Robot, Contract };

std::string_view to_string(AccountKind kind);
/// Throws std::invalid_argument on an unknown name.
AccountKind account_kind_from_string(std::string_view name);

struct AccountId {
  AccountKind kind{AccountKind::Human};
  std::string label;

  static AccountId human(std::string label) { return {AccountKind::Human, std::move(label)}; }
  static AccountId robot(std::string label) { return {AccountKind::Robot, std::move(label)}; }
  static AccountId contract(std::string label) { return {AccountKind::Contract, std::move(label)}; }

  bool operator==(const AccountId&) const = default;
  // Labels are unique within a simulation, so ordering is by label first.
  std::strong_ordering operator<=>(const AccountId& other) const {
    if (auto c = label <=> other.label; c != 0) return c;
    return kind <=> other.kind;
  }
};

std::string to_string(const AccountId& id);

}  // namespace roboecon
