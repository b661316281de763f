#include <doctest.h>

#include <chrono>
#include <fstream>
#include <cmath>
#include <cstring>
#include <random>
#include <thread>

#include "oracles.hpp"
#include "syncap/common/error.hpp"
#include "syncap/dataplane/crc32.hpp"
#include "syncap/dataplane/merge.hpp"
#include "syncap/dataplane/payload_codecs.hpp"
#include "syncap/dataplane/record.hpp"
#include "syncap/dataplane/store.hpp"
#include "syncap/dataplane/stream_frame.hpp"
#include "syncap/dataplane/stream_sender.hpp"
#include "syncap/dataplane/tcp_transport.hpp"
#include "syncap/dataplane/verify.hpp"
#include "temp_dir.hpp"

using namespace syncap;
using namespace syncap::dataplane;
namespace fs = std::filesystem;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected syncap::Error");
  return ErrorCode::InvalidArgument;
}

CaptureRecord image_record(std::uint16_t device, std::uint32_t trigger, std::size_t bytes = 16) {
  CaptureRecord r;
  r.device = device;
  r.trigger_id = trigger;
  r.capture_time_ns = 1'000'000LL * (trigger + 1);
  r.kind = PayloadKind::Image;
  r.payload.resize(bytes);
  for (std::size_t i = 0; i < bytes; ++i) r.payload[i] = static_cast<std::uint8_t>(i * 31 + trigger + device);
  return seal(r);
}

CaptureRecord random_record(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  CaptureRecord r;
  r.device = static_cast<std::uint16_t>(rng());
  r.trigger_id = static_cast<std::uint32_t>(rng());
  r.capture_time_ns = static_cast<std::int64_t>(rng());
  r.pose = {oracle::random_rotation(rng), {u(rng), u(rng), u(rng)}};
  r.intrinsics = {400 + u(rng), 400 + u(rng), 320 + u(rng), 240 + u(rng), 640, 480};
  r.kind = static_cast<PayloadKind>(1 + rng() % 3);
  r.payload.resize(rng() % 300);
  for (auto& b : r.payload) b = static_cast<std::uint8_t>(rng());
  return seal(r);
}

void put_le(std::vector<std::uint8_t>& out, std::uint64_t v, int width) {
  for (int i = 0; i < width; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_f64(std::vector<std::uint8_t>& out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  put_le(out, bits, 8);
}

geometry::Skeleton2D skeleton(std::size_t joints) {
  geometry::Skeleton2D s;
  for (std::size_t m = 0; m < joints; ++m)
    if (m % 7 == 3)
      s.joints.emplace_back(std::nullopt);
    else
      s.joints.push_back(geometry::Joint2D{{100.0 + m + 1.0 / 3.0, 200.0 - m * 0.1}, 0.5 + 0.01 * m});
  return s;
}

}  // namespace

TEST_SUITE("records") {
  TEST_CASE("crc check value") {
    const std::string s = "123456789";
    CHECK(crc32({reinterpret_cast<const std::uint8_t*>(s.data()), s.size()}) == 0xCBF43926u);
  }

  TEST_CASE("empty payload is header only and round-trips") {
    CaptureRecord r;
    seal(r);
    const auto b = serialize_record(r);
    CHECK(b.size() == kRecordOverhead);
    CHECK(deserialize_record(b) == r);
  }

  TEST_CASE("byte layout matches a hand-built record") {
    CaptureRecord r;
    r.device = 0x0102;
    r.trigger_id = 0x03040506;
    r.capture_time_ns = -5;
    r.pose.rotation << 1, 2, 3, 4, 5, 6, 7, 8, 9;
    r.pose.translation = {10, 11, 12};
    r.intrinsics = {500, 501, 320, 240, 640, 480};
    r.kind = PayloadKind::Joints2D;
    r.payload = {0xAA, 0xBB};
    r.checksum = 0xDEADBEEF;

    std::vector<std::uint8_t> expected{'C', 'R', 'E', 'C', 1};
    put_le(expected, 0x0102, 2);
    put_le(expected, 0x03040506, 4);
    put_le(expected, static_cast<std::uint64_t>(-5LL), 8);
    for (double v : {1., 2., 3., 10., 4., 5., 6., 11., 7., 8., 9., 12.}) put_f64(expected, v);
    for (double v : {500., 501., 320., 240., 640., 480.}) put_f64(expected, v);
    expected.push_back(2);
    put_le(expected, 2, 4);
    expected.push_back(0xAA);
    expected.push_back(0xBB);
    put_le(expected, 0xDEADBEEF, 4);
    CHECK(serialize_record(r) == expected);
  }

  TEST_CASE("160 KB payload") {
    const auto r = image_record(1, 1, 160 * 1024);
    const auto b = serialize_record(r);
    CHECK(b.size() == kRecordOverhead + 160 * 1024);
    CHECK(deserialize_record(b) == r);
  }

  TEST_CASE("corruption and truncation") {
    const auto r = image_record(2, 3, 64);
    auto b = serialize_record(r);
    auto bad = b;
    bad[kRecordOverhead - 4 + 10] ^= 0x01;  // a payload byte
    CHECK(code_of([&] { deserialize_record(bad); }) == ErrorCode::ChecksumMismatch);
    CHECK(code_of([&] { deserialize_record(std::span(b).first(b.size() - 1)); }) == ErrorCode::TruncatedInput);
    CHECK(code_of([&] { deserialize_record(std::span(b).first(10)); }) == ErrorCode::TruncatedInput);
    bad = b;
    bad[0] = 'X';
    CHECK(code_of([&] { deserialize_record(bad); }) == ErrorCode::BadMagic);
    bad = b;
    bad.push_back(0);
    CHECK(code_of([&] { deserialize_record(bad); }) == ErrorCode::InvalidArgument);
  }

  TEST_CASE("oversized payload") {
    CaptureRecord r;
    r.payload.resize(kMaxPayloadBytes + 1);
    CHECK(code_of([&] { serialize_record(r); }) == ErrorCode::PayloadTooLarge);
  }

  TEST_CASE("round trip on 10k random records") {
    std::mt19937_64 rng(1);
    for (int t = 0; t < 10000; ++t) {
      const auto r = random_record(rng);
      const auto back = deserialize_record(serialize_record(r));
      if (!(back == r)) FAIL("round trip mismatch at trial " << t);
    }
  }

  TEST_CASE("decode throughput is at least 1000 records per second") {
    const auto b = serialize_record(image_record(0, 0, 160 * 1024));
    const int n = 300;
    const auto start = std::chrono::steady_clock::now();
    for (int i = 0; i < n; ++i) {
      volatile auto size = deserialize_record(b).payload.size();
      (void)size;
    }
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    MESSAGE("160 KB records decoded per second: " << n / s);
    CHECK(n / s >= 1000.0);
  }
}

TEST_SUITE("payload codecs") {
  TEST_CASE("joints round trip with missing entries") {
    const auto s = skeleton(25);
    const auto b = encode_joints(s);
    CHECK(b.size() == 25 * kJointBytes);
    const auto back = decode_joints(b, 25);
    REQUIRE(back.joints.size() == 25);
    for (std::size_t m = 0; m < 25; ++m) {
      CHECK(back.joints[m].has_value() == s.joints[m].has_value());
      if (s.joints[m]) {
        CHECK(back.joints[m]->position == s.joints[m]->position);
        CHECK(back.joints[m]->confidence == s.joints[m]->confidence);
      }
    }
    CHECK(code_of([&] { decode_joints(b, 24); }) == ErrorCode::InvalidArgument);
    CHECK(code_of([&] { decode_joints(std::span(b).first(b.size() - 3), 25); }) == ErrorCode::TruncatedInput);
  }

  TEST_CASE("silhouette layout") {
    geometry::Mask m(3, 2);
    m.set(0, 0);
    m.set(1, 0);
    m.set(2, 1);
    const auto b = encode_silhouette(m);
    // 3x2 mask 1 1 0 / 0 0 1 -> runs 0,2,3,1
    std::vector<std::uint8_t> expected{3, 0, 2, 0};
    for (std::uint32_t run : {0u, 2u, 3u, 1u}) put_le(expected, run, 4);
    CHECK(b == expected);
    CHECK(decode_silhouette(b) == m);
  }

  TEST_CASE("silhouette round trip on random masks") {
    std::mt19937_64 rng(2);
    for (int t = 0; t < 200; ++t) {
      geometry::Mask m(1 + rng() % 50, 1 + rng() % 50);
      const double p = (rng() % 100) / 100.0;
      std::bernoulli_distribution b(p);
      for (auto& px : m.pixels) px = b(rng);
      CHECK(decode_silhouette(encode_silhouette(m)) == m);
    }
    geometry::Mask empty(4, 4);
    CHECK(encode_silhouette(empty).size() == 8);
  }

  TEST_CASE("silhouette rejects runs that do not cover the mask") {
    std::vector<std::uint8_t> b{2, 0, 2, 0};
    put_le(b, 3, 4);
    CHECK(code_of([&] { decode_silhouette(b); }) == ErrorCode::InvalidArgument);
    put_le(b, 5, 4);
    CHECK(code_of([&] { decode_silhouette(b); }) == ErrorCode::InvalidArgument);
  }
}

TEST_SUITE("verification") {
  TEST_CASE("well formed record") {
    Verifier v;
    CHECK(v.verify(image_record(0, 1)).verified);
    CaptureRecord j;
    j.device = 1;
    j.kind = PayloadKind::Joints2D;
    j.payload = encode_joints(skeleton(25));
    j.capture_time_ns = 5;
    CHECK(v.verify(seal(j)).verified);
  }

  TEST_CASE("reflection is rejected") {
    Verifier v;
    auto r = image_record(0, 1);
    r.pose.rotation = Eigen::Vector3d(1, 1, -1).asDiagonal();
    const auto verdict = v.verify(r);
    CHECK_FALSE(verdict.verified);
    CHECK(verdict.reason == RejectReason::BadPose);
    CHECK(v.rejected(RejectReason::BadPose) == 1);
  }

  TEST_CASE("missing joint entry is a bad payload") {
    Verifier v(25);
    CaptureRecord r;
    r.kind = PayloadKind::Joints2D;
    r.payload = encode_joints(skeleton(24));
    const auto verdict = v.verify(seal(r));
    CHECK_FALSE(verdict.verified);
    CHECK(verdict.reason == RejectReason::BadPayload);
  }

  TEST_CASE("checksum and time order") {
    Verifier v;
    auto r = image_record(0, 1);
    r.payload[0] ^= 1;
    CHECK(v.verify(r).reason == RejectReason::Checksum);
    CHECK(v.verify(image_record(0, 5)).verified);
    CHECK(v.verify(image_record(0, 4)).reason == RejectReason::NonMonotonicTime);
    CHECK(v.verify(image_record(1, 4)).verified);
    CHECK(v.rejected_total() == 2);
    CHECK(v.verified() == 2);
  }

  TEST_CASE("silhouette must match the sensor size") {
    Verifier v;
    CaptureRecord r;
    r.kind = PayloadKind::Silhouette;
    r.intrinsics.width = 8;
    r.intrinsics.height = 4;
    r.intrinsics.cx = 4;
    r.intrinsics.cy = 2;
    r.payload = encode_silhouette(geometry::Mask(8, 4));
    CHECK(v.verify(seal(r)).verified);
    r.payload = encode_silhouette(geometry::Mask(8, 5));
    r.capture_time_ns = 10;
    CHECK(v.verify(seal(r)).reason == RejectReason::BadPayload);
  }
}

TEST_SUITE("stream frames") {
  TEST_CASE("frame layout and decode in odd chunks") {
    std::vector<std::uint8_t> body{1, 2, 3};
    const auto f = encode_frame(body);
    CHECK(f == std::vector<std::uint8_t>{'S', 'C', 'F', 'R', 3, 0, 0, 0, 1, 2, 3});
    FrameDecoder d;
    for (auto b : f) {
      CHECK_FALSE(d.next());
      d.feed(std::span(&b, 1));
    }
    auto got = d.next();
    REQUIRE(got);
    CHECK(*got == body);
    CHECK(code_of([] { encode_frame({}); }) == ErrorCode::InvalidArgument);
  }

  TEST_CASE("garbage between frames loses at most the adjacent frame") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 300; ++trial) {
      const int n = 12;
      std::vector<CaptureRecord> records;
      std::vector<std::uint8_t> stream;
      const int gap = static_cast<int>(rng() % (n + 1));  // garbage goes before frame `gap`
      for (int k = 0; k < n; ++k) {
        if (k == gap) {
          std::vector<std::uint8_t> junk(1 + rng() % 64);
          for (auto& b : junk) b = static_cast<std::uint8_t>(rng());
          if (trial % 3 == 0 && junk.size() >= 8) std::copy(kFrameMagic.begin(), kFrameMagic.end(), junk.begin());
          stream.insert(stream.end(), junk.begin(), junk.end());
        }
        records.push_back(image_record(0, k, 10 + rng() % 100));
        const auto f = encode_frame(serialize_record(records.back()));
        stream.insert(stream.end(), f.begin(), f.end());
      }
      FrameDecoder d(is_valid_record_body);
      std::vector<std::uint32_t> got;
      std::size_t at = 0;
      while (at < stream.size()) {
        const std::size_t chunk = std::min<std::size_t>(1 + rng() % 200, stream.size() - at);
        d.feed(std::span(stream).subspan(at, chunk));
        at += chunk;
        while (auto body = d.next()) got.push_back(deserialize_record(*body).trigger_id);
      }
      d.finish();
      while (auto body = d.next()) got.push_back(deserialize_record(*body).trigger_id);
      CHECK(got.size() >= n - 1);
      for (std::uint32_t k = gap + 1; k < static_cast<std::uint32_t>(n); ++k)
        CHECK(std::find(got.begin(), got.end(), k) != got.end());
      CHECK(std::is_sorted(got.begin(), got.end()));
    }
  }

  TEST_CASE("corrupted frame is skipped") {
    std::vector<std::uint8_t> stream;
    for (std::uint32_t k = 0; k < 3; ++k) {
      const auto f = encode_frame(serialize_record(image_record(0, k, 50)));
      stream.insert(stream.end(), f.begin(), f.end());
    }
    stream[kFrameHeader + kRecordOverhead + 60] ^= 0xFF;  // payload of frame 1
    FrameDecoder d(is_valid_record_body);
    d.feed(stream);
    d.finish();
    std::vector<std::uint32_t> got;
    while (auto body = d.next()) got.push_back(deserialize_record(*body).trigger_id);
    CHECK(got == std::vector<std::uint32_t>{0, 2});
    CHECK(d.rejected_frames() >= 1);
  }
}

TEST_SUITE("merge") {
  TEST_CASE("complete group") {
    Merger m({0, 1, 2});
    for (std::uint16_t d : {0, 1, 2}) m.push(image_record(d, 5), 0);
    const auto out = m.take();
    REQUIRE(out.size() == 1);
    CHECK(out[0].trigger_id == 5);
    CHECK(out[0].completeness() == 1.0);
  }

  TEST_CASE("watermark releases an incomplete trigger") {
    Merger m({0, 1, 2});
    m.push(image_record(0, 5), 0);
    m.push(image_record(1, 5), 0);
    CHECK(m.take().empty());
    m.push(image_record(0, 6), 0);
    m.push(image_record(1, 6), 0);
    CHECK(m.take().empty());
    m.push(image_record(2, 6), 0);
    const auto out = m.take();
    REQUIRE(out.size() == 2);
    CHECK(out[0].trigger_id == 5);
    CHECK(out[0].records.size() == 2);
    CHECK(out[0].completeness() == doctest::Approx(2.0 / 3.0));
    CHECK(out[1].completeness() == 1.0);
  }

  TEST_CASE("duplicates keep the first copy") {
    Merger m({0, 1});
    auto first = image_record(0, 5);
    auto second = image_record(0, 5, 3);
    m.push(first, 0);
    m.push(second, 0);
    CHECK(m.stats().duplicates == 1);
    m.push(image_record(1, 5), 0);
    const auto out = m.take();
    REQUIRE(out.size() == 1);
    CHECK(out[0].records.at(0) == first);
  }

  TEST_CASE("timeout and late records") {
    Merger m({0, 1}, {500'000'000});
    m.push(image_record(0, 1), 0);
    m.advance(499'999'999);
    CHECK(m.take().empty());
    m.advance(500'000'000);
    const auto out = m.take();
    REQUIRE(out.size() == 1);
    CHECK(out[0].records.size() == 1);
    m.push(image_record(1, 1), 600'000'000);
    CHECK(m.stats().late == 1);
    m.push(image_record(9, 2), 0);
    CHECK(m.stats().unexpected == 1);
  }

  TEST_CASE("loss-free delivery is complete and in order under shuffled arrival") {
    std::mt19937_64 rng(4);
    const std::uint16_t devices = 6;
    std::vector<std::vector<CaptureRecord>> per_device(devices);
    for (std::uint16_t d = 0; d < devices; ++d)
      for (std::uint32_t k = 0; k < 100; ++k) per_device[d].push_back(image_record(d, k));
    Merger m({0, 1, 2, 3, 4, 5});
    std::vector<std::size_t> next(devices, 0);
    std::vector<MergedCapture> out;
    std::size_t left = devices * 100;
    while (left > 0) {
      const auto d = rng() % devices;
      if (next[d] == 100) continue;
      m.push(per_device[d][next[d]++], 0);
      --left;
      for (auto& c : m.take()) out.push_back(std::move(c));
    }
    m.flush();
    for (auto& c : m.take()) out.push_back(std::move(c));
    REQUIRE(out.size() == 100);
    for (std::uint32_t k = 0; k < 100; ++k) {
      CHECK(out[k].trigger_id == k);
      CHECK(out[k].completeness() == 1.0);
    }
  }
}

TEST_SUITE("store") {
  TEST_CASE("layout and duplicate rejection") {
    TempDir tmp;
    Store store(tmp.path);
    MergedCapture mc{5, {}, 6};
    for (std::uint16_t d = 0; d < 6; ++d) mc.records.emplace(d, image_record(d, 5));
    const auto files = store.persist(mc);
    CHECK(files.size() == 7);
    const auto dir = tmp.path / "trigger_000005";
    CHECK(fs::is_directory(dir));
    std::size_t payloads = 0;
    for (const auto& e : fs::directory_iterator(dir)) payloads += e.path().extension() == ".img";
    CHECK(payloads == 6);
    CHECK(fs::exists(dir / "manifest.jsonl"));
    CHECK(code_of([&] { store.persist(mc); }) == ErrorCode::DuplicateTrigger);

    const auto back = Store::load(tmp.path, 5);
    CHECK(back.expected == 6);
    REQUIRE(back.records.size() == 6);
    for (std::uint16_t d = 0; d < 6; ++d) CHECK(back.records.at(d) == mc.records.at(d));
  }

  TEST_CASE("a full session gets one directory per trigger, in order") {
    TempDir tmp;
    Store store(tmp.path);
    for (std::uint32_t k = 0; k < 312; ++k) {
      MergedCapture mc{k, {}, 2};
      mc.records.emplace(0, image_record(0, k, 4));
      store.persist(mc);
    }
    std::size_t dirs = 0;
    for (const auto& e : fs::directory_iterator(tmp.path)) dirs += e.is_directory();
    CHECK(dirs == 312);
    const auto ids = Store::list(tmp.path);
    REQUIRE(ids.size() == 312);
    for (std::size_t k = 1; k < ids.size(); ++k) CHECK(ids[k] > ids[k - 1]);
    CHECK(Store::load(tmp.path, 100).completeness() == 0.5);
  }

  TEST_CASE("corrupted stored payload is detected") {
    TempDir tmp;
    Store store(tmp.path);
    MergedCapture mc{1, {}, 1};
    mc.records.emplace(0, image_record(0, 1, 32));
    store.persist(mc);
    {
      std::fstream f(tmp.path / "trigger_000001" / "device_00.img", std::ios::in | std::ios::out | std::ios::binary);
      f.seekp(3);
      f.put('\x7f');
    }
    CHECK(code_of([&] { Store::load(tmp.path, 1); }) == ErrorCode::ChecksumMismatch);
    CHECK(code_of([&] { Store::load(tmp.path, 2); }) == ErrorCode::IoFailure);
  }
}

namespace {

// In-memory receiver with a per-call byte budget; acknowledges every frame it decodes.
struct LoopbackStream final : ByteStream {
  std::size_t budget = SIZE_MAX;  // bytes accepted per try_write
  std::size_t fail_after = SIZE_MAX;
  std::size_t total = 0;
  FrameDecoder decoder{is_valid_record_body};
  std::vector<std::uint32_t> delivered;

  std::size_t try_write(std::span<const std::uint8_t> bytes) override {
    if (total >= fail_after) fail(ErrorCode::ConnectionLost, "reset");
    std::size_t n = std::min({bytes.size(), budget, fail_after - total});
    decoder.feed(bytes.first(n));
    total += n;
    while (auto body = decoder.next()) delivered.push_back(deserialize_record(*body).trigger_id);
    return n;
  }
};

}  // namespace

TEST_SUITE("stream sender") {
  TEST_CASE("unconstrained link delivers everything in order") {
    StreamSender s(8);
    LoopbackStream link;
    for (std::uint32_t k = 0; k < 100; ++k) {
      s.enqueue(image_record(0, k, 200));
      s.pump(link);
    }
    CHECK(s.stats().dropped_oldest == 0);
    REQUIRE(link.delivered.size() == 100);
    for (std::uint32_t k = 0; k < 100; ++k) CHECK(link.delivered[k] == k);
    CHECK(s.in_flight() == 100);
    s.on_ack(99);
    CHECK(s.in_flight() == 0);
  }

  TEST_CASE("capped link drops the oldest without blocking capture") {
    StreamSender s(4);
    LoopbackStream link;
    link.budget = 150;  // less than one frame per capture tick
    for (std::uint32_t k = 0; k < 200; ++k) {
      const auto t0 = std::chrono::steady_clock::now();
      s.enqueue(image_record(0, k, 400));
      CHECK(std::chrono::steady_clock::now() - t0 < std::chrono::milliseconds(50));
      s.pump(link);
    }
    CHECK(s.stats().dropped_oldest > 0);
    CHECK(s.queued() <= 4);
    CHECK(std::is_sorted(link.delivered.begin(), link.delivered.end()));
  }

  TEST_CASE("reset mid-stream resumes without duplicating acknowledged frames") {
    StreamSender s(64);
    LoopbackStream first;
    first.fail_after = 5 * (kFrameHeader + kRecordOverhead + 100) + 37;  // dies inside frame 5
    for (std::uint32_t k = 0; k < 10; ++k) s.enqueue(image_record(0, k, 100));
    CHECK_THROWS_AS(for (int i = 0; i < 10; ++i) s.pump(first), Error);
    CHECK(first.delivered == std::vector<std::uint32_t>{0, 1, 2, 3, 4});
    // the manager acknowledged 0..3; the ack for 4 was lost with the connection
    s.on_ack(3);
    LoopbackStream second;
    s.resume(3);
    s.pump(second);
    CHECK(second.delivered == std::vector<std::uint32_t>{4, 5, 6, 7, 8, 9});
    CHECK(s.stats().resent == 1);
  }
}

TEST_SUITE("tcp data plane") {
  TEST_CASE("three devices stream to the manager over loopback") {
    std::mutex mutex;
    std::vector<MergedCapture> merged;
    ManagerService manager(0, {0, 1, 2}, [&](MergedCapture m) {
      std::lock_guard lock(mutex);
      merged.push_back(std::move(m));
    });
    {
      std::vector<std::jthread> devices;
      for (std::uint16_t d = 0; d < 3; ++d)
        devices.emplace_back([&, d] {
          TcpStreamClient link("127.0.0.1", manager.port(), d);
          CHECK_FALSE(link.resume_point().has_value());
          StreamSender s(64);
          for (std::uint32_t k = 0; k < 30; ++k) {
            s.enqueue(image_record(d, k, 2000));
            s.pump(link);
            for (auto a : link.poll_acks()) s.on_ack(a);
          }
          const auto deadline = std::chrono::steady_clock::now() + std::chrono::seconds(10);
          while ((!s.idle() || s.in_flight() > 0) && std::chrono::steady_clock::now() < deadline) {
            s.pump(link);
            for (auto a : link.poll_acks()) s.on_ack(a);
            std::this_thread::sleep_for(std::chrono::milliseconds(2));
          }
          CHECK(s.in_flight() == 0);
        });
    }
    manager.stop();
    REQUIRE(merged.size() == 30);
    for (std::uint32_t k = 0; k < 30; ++k) {
      CHECK(merged[k].trigger_id == k);
      CHECK(merged[k].completeness() == 1.0);
    }
    CHECK(manager.stats().merge.duplicates == 0);
  }

  TEST_CASE("reconnect resumes after the last acknowledged trigger") {
    std::mutex mutex;
    std::vector<MergedCapture> merged;
    ManagerService manager(0, {7}, [&](MergedCapture m) {
      std::lock_guard lock(mutex);
      merged.push_back(std::move(m));
    });
    StreamSender s(64);
    for (std::uint32_t k = 0; k < 20; ++k) s.enqueue(image_record(7, k, 500));
    auto wait_acks = [&](TcpStreamClient& link, std::uint32_t upto) {
      const auto deadline = std::chrono::steady_clock::now() + std::chrono::seconds(10);
      while (std::chrono::steady_clock::now() < deadline) {
        s.pump(link);
        bool done = false;
        for (auto a : link.poll_acks()) {
          s.on_ack(a);
          done = done || a >= upto;
        }
        if (done) return;
        std::this_thread::sleep_for(std::chrono::milliseconds(2));
      }
      FAIL("no ack for " << upto);
    };
    {
      TcpStreamClient link("127.0.0.1", manager.port(), 7);
      wait_acks(link, 19);
      link.reset();
    }
    for (std::uint32_t k = 20; k < 30; ++k) s.enqueue(image_record(7, k, 500));
    {
      TcpStreamClient link("127.0.0.1", manager.port(), 7);
      REQUIRE(link.resume_point().has_value());
      CHECK(*link.resume_point() == 19u);
      s.resume(link.resume_point());
      wait_acks(link, 29);
    }
    manager.stop();
    REQUIRE(merged.size() == 30);
    for (std::uint32_t k = 0; k < 30; ++k) CHECK(merged[k].trigger_id == k);
    CHECK(manager.stats().merge.duplicates == 0);
    CHECK(manager.stats().connections == 2);
  }
}
