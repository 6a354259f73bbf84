#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace cicc {

// Reserved label name marking out-of-scope rows at ingestion. It is never
// assigned a class index, so K always equals the in-scope intent count.
inline constexpr std::string_view kOosLabel = "__oos__";

// Seed used by every batch subcommand when --seed is not given.
inline constexpr std::uint64_t kDefaultSeed = 42;

using ClassId = int;

// Bad input at the tool boundary: malformed files, invalid flag combinations,
// violated operation preconditions. The CLI maps this to exit code 2;
// any other exception is an internal error (exit code 1).
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Generative-client failure: transport error, timeout, malformed or
// off-topic reply. Callers degrade to template questions on this.
class ClientError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Fisher-Yates with a fixed reduction. std::shuffle's draw sequence is
// implementation-defined, which would break byte-identical reruns.
template <typename T>
void deterministic_shuffle(std::vector<T>& items, std::mt19937_64& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(items[i - 1], items[j]);
  }
}

// Shortest representation that round-trips; "inf" for the infinite sentinel.
std::string format_double(double x);

}  // namespace cicc
