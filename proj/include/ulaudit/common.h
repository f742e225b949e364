// Copyright 2026 The ulaudit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef ULAUDIT_COMMON_H_
#define ULAUDIT_COMMON_H_

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ulaudit {

// Failure categories. The CLI maps them onto process exit codes.
enum class ErrorKind {
  kInvalidArgument,  // caller passed something that violates a precondition
  kConfig,           // experiment configuration is invalid
  kCompute,          // training or unlearning aborted (NaN, divergence)
  kIo,               // file missing, unreadable, malformed or unwritable
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void Fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

inline void Require(bool condition, const std::string& message) {
  if (!condition) Fail(ErrorKind::kInvalidArgument, message);
}

// SplitMix64 finalizer; the building block of every derived seed.
constexpr std::uint64_t Mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// FNV-1a over a byte string. Used for string tags and provenance hashes.
constexpr std::uint64_t Fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Counter-based seed derivation: the result depends only on the base seed
// and the ordered list of counters, never on call order or thread.
constexpr std::uint64_t DeriveSeed(std::uint64_t base,
                                   std::initializer_list<std::uint64_t> parts) {
  std::uint64_t h = Mix64(base);
  for (std::uint64_t p : parts) h = Mix64(h ^ Mix64(p + 0x632be59bd9b4e019ULL));
  return h;
}

constexpr std::uint64_t Tag(std::string_view name) { return Fnv1a(name); }

using Rng = std::mt19937_64;

inline Rng MakeRng(std::uint64_t seed) { return Rng(seed); }

// Uniform double in [0, 1) with 53 random bits.
inline double Uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Fisher-Yates permutation of 0..n-1.
std::vector<std::size_t> Permutation(std::size_t n, std::uint64_t seed);

// Hex rendering of a 64-bit hash, zero padded.
std::string HexDigest(std::uint64_t value);

}  // namespace ulaudit

#endif  // ULAUDIT_COMMON_H_
