#include "syncap/dataplane/store.hpp"

#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "syncap/common/error.hpp"
#include "syncap/dataplane/crc32.hpp"

namespace syncap::dataplane {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const char* extension(PayloadKind kind) {
  switch (kind) {
    case PayloadKind::Image: return ".img";
    case PayloadKind::Joints2D: return ".joints";
    case PayloadKind::Silhouette: return ".sil";
  }
  return ".bin";
}

std::string payload_name(const CaptureRecord& r) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "device_%02u", static_cast<unsigned>(r.device));
  return std::string(buf) + extension(r.kind);
}

void write_file(const fs::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorCode::IoFailure, "cannot write " + path.string());
}

std::vector<std::uint8_t> read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoFailure, "cannot read " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

json record_json(const CaptureRecord& r, const std::string& file) {
  json pose = json::array();
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) pose.push_back(r.pose.rotation(i, j));
    pose.push_back(r.pose.translation[i]);
  }
  const auto& k = r.intrinsics;
  return {{"device", r.device},
          {"trigger_id", r.trigger_id},
          {"capture_time_ns", r.capture_time_ns},
          {"pose", pose},
          {"intrinsics", {k.fx, k.fy, k.cx, k.cy, k.width, k.height}},
          {"kind", to_string(r.kind)},
          {"payload", file},
          {"payload_bytes", r.payload.size()},
          {"crc32", r.checksum}};
}

PayloadKind kind_from(const std::string& s) {
  if (s == "IMAGE") return PayloadKind::Image;
  if (s == "JOINTS2D") return PayloadKind::Joints2D;
  if (s == "SILHOUETTE") return PayloadKind::Silhouette;
  fail(ErrorCode::IoFailure, "unknown payload kind in manifest: " + s);
}

}  // namespace

Store::Store(fs::path root) : root_(std::move(root)) {
  std::error_code ec;
  fs::create_directories(root_, ec);
  if (ec) fail(ErrorCode::IoFailure, "cannot create store root " + root_.string() + ": " + ec.message());
}

fs::path Store::trigger_dir(const fs::path& root, std::uint32_t trigger_id) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "trigger_%06u", trigger_id);
  return root / buf;
}

std::vector<fs::path> Store::persist(const MergedCapture& merged) {
  const auto dir = trigger_dir(root_, merged.trigger_id);
  if (fs::exists(dir)) fail(ErrorCode::DuplicateTrigger, "trigger already persisted: " + dir.string());
  if (last_ && merged.trigger_id <= *last_) fail(ErrorCode::InvalidArgument, "trigger ids must increase");
  std::error_code ec;
  fs::create_directory(dir, ec);
  if (ec) fail(ErrorCode::IoFailure, "cannot create " + dir.string() + ": " + ec.message());

  std::vector<fs::path> written;
  std::ofstream manifest(dir / "manifest.jsonl");
  manifest << json{{"trigger_id", merged.trigger_id},
                   {"expected", merged.expected},
                   {"received", merged.records.size()},
                   {"completeness", merged.completeness()}}
                  .dump()
           << '\n';
  for (const auto& [device, r] : merged.records) {
    const auto name = payload_name(r);
    write_file(dir / name, r.payload);
    written.push_back(dir / name);
    manifest << record_json(r, name).dump() << '\n';
  }
  if (!manifest) fail(ErrorCode::IoFailure, "cannot write manifest in " + dir.string());
  written.push_back(dir / "manifest.jsonl");

  std::ofstream session(root_ / "session.jsonl", std::ios::app);
  session << json{{"trigger_id", merged.trigger_id},
                  {"dir", dir.filename().string()},
                  {"completeness", merged.completeness()}}
                 .dump()
          << '\n';
  if (!session) fail(ErrorCode::IoFailure, "cannot append session index");
  last_ = merged.trigger_id;
  ++persisted_;
  return written;
}

MergedCapture Store::load(const fs::path& root, std::uint32_t trigger_id) {
  const auto dir = trigger_dir(root, trigger_id);
  std::ifstream in(dir / "manifest.jsonl");
  if (!in) fail(ErrorCode::IoFailure, "missing manifest in " + dir.string());
  MergedCapture out;
  std::string line;
  bool header = true;
  try {
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto j = json::parse(line);
      if (header) {
        out.trigger_id = j.at("trigger_id");
        out.expected = j.at("expected");
        header = false;
        continue;
      }
      CaptureRecord r;
      r.device = j.at("device");
      r.trigger_id = j.at("trigger_id");
      r.capture_time_ns = j.at("capture_time_ns");
      const auto& pose = j.at("pose");
      for (int i = 0; i < 3; ++i) {
        for (int k = 0; k < 3; ++k) r.pose.rotation(i, k) = pose.at(4 * i + k);
        r.pose.translation[i] = pose.at(4 * i + 3);
      }
      const auto& k = j.at("intrinsics");
      r.intrinsics = {k.at(0), k.at(1), k.at(2), k.at(3), k.at(4), k.at(5)};
      r.kind = kind_from(j.at("kind"));
      r.payload = read_file(dir / j.at("payload").get<std::string>());
      r.checksum = j.at("crc32");
      if (crc32(r.payload) != r.checksum) fail(ErrorCode::ChecksumMismatch, "stored payload corrupted");
      out.records.emplace(r.device, std::move(r));
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::IoFailure, std::string("bad manifest: ") + e.what());
  }
  if (header) fail(ErrorCode::IoFailure, "empty manifest in " + dir.string());
  return out;
}

std::vector<std::uint32_t> Store::list(const fs::path& root) {
  std::ifstream in(root / "session.jsonl");
  if (!in) fail(ErrorCode::IoFailure, "no session index in " + root.string());
  std::vector<std::uint32_t> ids;
  std::string line;
  try {
    while (std::getline(in, line))
      if (!line.empty()) ids.push_back(json::parse(line).at("trigger_id"));
  } catch (const json::exception& e) {
    fail(ErrorCode::IoFailure, std::string("bad session index: ") + e.what());
  }
  return ids;
}

}  // namespace syncap::dataplane
