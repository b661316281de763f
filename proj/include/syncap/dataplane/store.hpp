#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "syncap/dataplane/merge.hpp"

namespace syncap::dataplane {

/// Directory store: <root>/trigger_NNNNNN/ holds one payload file per device
/// and manifest.jsonl (a summary line, then one line per device record);
/// <root>/session.jsonl gets one line per persisted trigger.
class Store {
 public:
  explicit Store(std::filesystem::path root);

  /// Throws DuplicateTrigger when the trigger was already persisted,
  /// InvalidArgument when ids do not increase, IoFailure on write errors.
  std::vector<std::filesystem::path> persist(const MergedCapture& merged);

  const std::filesystem::path& root() const { return root_; }
  std::size_t persisted() const { return persisted_; }

  static std::filesystem::path trigger_dir(const std::filesystem::path& root, std::uint32_t trigger_id);

  /// Reads a persisted trigger back. Throws IoFailure or ChecksumMismatch.
  static MergedCapture load(const std::filesystem::path& root, std::uint32_t trigger_id);
  /// Trigger ids listed in session.jsonl, in file order.
  static std::vector<std::uint32_t> list(const std::filesystem::path& root);

 private:
  std::filesystem::path root_;
  std::optional<std::uint32_t> last_;
  std::size_t persisted_ = 0;
};

}  // namespace syncap::dataplane
