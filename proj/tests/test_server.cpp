#include <doctest.h>

#include <filesystem>
#include <thread>

#include "net_client.hpp"
#include "sosim/server/replay.hpp"
#include "sosim/server/session.hpp"
#include "sosim/server/tcp_server.hpp"
#include "sosim/server/websocket.hpp"

using namespace sosim;
using namespace sosim::server;

namespace {

RunConfig flocking_config() {
  RunConfig rc;
  rc.model = "flocking";
  rc.world.seed = 21;
  rc.params = {{"n_nodes", 40}, {"n_towers", 3}, {"step", 0.5}};
  return rc;
}

struct FakeClock {
  double now = 0;
  Clock clock() {
    return [this] { return now; };
  }
};

std::vector<json> take(Session& s, ClientId c) {
  std::vector<json> out;
  for (const auto& line : s.drain(c)) {
    REQUIRE(!line.empty());
    REQUIRE(line.back() == '\n');
    out.push_back(json::parse(line));
  }
  return out;
}

std::size_t count_type(const std::vector<json>& ms, const std::string& type) {
  return static_cast<std::size_t>(std::count_if(ms.begin(), ms.end(), [&](const json& m) { return m["type"] == type; }));
}

json control(int id, const std::string& action, int count = 0) {
  json m = {{"id", id}, {"type", "control"}, {"action", action}};
  if (count) m["count"] = count;
  return m;
}

}  // namespace

TEST_CASE("connect sends the schema first") {
  FakeClock fc;
  Session s(flocking_config(), {}, fc.clock());
  const auto c = s.connect();
  const auto ms = take(s, c);
  REQUIRE(ms.size() == 1);
  CHECK(ms[0]["type"] == "schema");
  CHECK(ms[0]["model"] == "flocking");
  bool saw_radius = false;
  for (const auto& p : ms[0]["params"]) {
    CHECK(p.contains("name"));
    CHECK(p.contains("type"));
    CHECK(p.contains("default"));
    if (p["name"] == "capture_radius") {
      saw_radius = true;
      CHECK(p["min"].get<double>() > 0);
      CHECK(p["max"].get<double>() >= 3);
      CHECK(p["live"] == false);
    }
  }
  CHECK(saw_radius);
  CHECK(ms[0]["metrics"] == json({"free_count", "assembly_ticks"}));
}

TEST_CASE("setup acks then sends a tick 0 frame; malformed input keeps the client") {
  FakeClock fc;
  Session s(flocking_config(), {}, fc.clock());
  const auto c = s.connect();
  take(s, c);
  s.receive(c, "{not json");
  s.receive(c, "[1,2]");
  s.receive(c, R"({"type":"control","action":"setup"})");
  s.receive(c, R"({"id":1,"type":"teleport"})");
  auto ms = take(s, c);
  REQUIRE(ms.size() == 4);
  for (const auto& m : ms) CHECK(m["type"] == "error");
  CHECK(ms[3]["id"] == 1);

  s.receive(c, control(2, "setup").dump());
  s.pump();
  ms = take(s, c);
  REQUIRE(ms.size() == 2);
  CHECK(ms[0] == json({{"type", "ack"}, {"id", 2}, {"status", "ok"}}));
  CHECK(ms[1]["type"] == "frame");
  CHECK(ms[1]["tick"] == 0);
  CHECK(ms[1]["agents"].size() == 43);
}

TEST_CASE("step n advances exactly n ticks with a frame each; step while running is refused") {
  FakeClock fc;
  Session s(flocking_config(), {0, 0}, fc.clock());
  const auto c = s.connect();
  s.receive(c, control(1, "setup").dump());
  s.receive(c, control(2, "step", 10).dump());
  s.pump();
  take(s, c);
  CHECK(s.simulation().world().tick() == 10);
  s.receive(c, control(3, "step", 5).dump());
  s.pump();
  auto ms = take(s, c);
  CHECK(s.simulation().world().tick() == 15);
  CHECK(count_type(ms, "frame") == 5);
  CHECK(count_type(ms, "metrics") == 5);
  CHECK(ms.back()["type"] == "ack");
  CHECK(!s.running());

  s.receive(c, control(4, "go").dump());
  s.pump();
  s.receive(c, control(5, "step", 1).dump());
  s.pump();
  ms = take(s, c);
  bool refused = false;
  for (const auto& m : ms)
    if (m["type"] == "error" && m["id"] == 5) refused = m["message"] == "stop first";
  CHECK(refused);

  const auto at_stop = s.simulation().world().tick();
  s.receive(c, control(6, "stop").dump());
  s.pump();
  CHECK(!s.running());
  CHECK(s.simulation().world().tick() >= at_stop);
  const auto paused = s.simulation().world().tick();
  for (int i = 0; i < 5; ++i) s.pump();
  CHECK(s.simulation().world().tick() == paused);

  s.receive(c, json({{"id", 7}, {"type", "control"}, {"action", "step"}, {"count", 0}}).dump());
  s.receive(c, control(8, "jump").dump());
  s.pump();
  ms = take(s, c);
  CHECK(count_type(ms, "error") == 2);
}

TEST_CASE("go needs setup") {
  FakeClock fc;
  Session s(flocking_config(), {}, fc.clock());
  const auto c = s.connect();
  take(s, c);
  s.receive(c, control(1, "go").dump());
  s.pump();
  const auto ms = take(s, c);
  REQUIRE(ms.size() == 1);
  CHECK(ms[0]["type"] == "error");
  CHECK_FALSE(s.running());
}

TEST_CASE("set-param: deferred for structural params, immediate for live ones") {
  FakeClock fc;
  Session s(flocking_config(), {}, fc.clock());
  const auto c = s.connect();
  s.receive(c, control(1, "setup").dump());
  s.receive(c, json({{"id", 2}, {"type", "set-param"}, {"name", "capture_radius"}, {"value", 5}}).dump());
  s.receive(c, json({{"id", 3}, {"type", "set-param"}, {"name", "step"}, {"value", 0.25}}).dump());
  s.receive(c, json({{"id", 4}, {"type", "set-param"}, {"name", "warp"}, {"value", 9}}).dump());
  s.pump();
  auto ms = take(s, c);
  std::map<int, json> by_id;
  for (const auto& m : ms)
    if (m.contains("id") && m["id"].is_number()) by_id[m["id"]] = m;
  CHECK(by_id[2]["status"] == "deferred");
  CHECK(by_id[3]["status"] == "ok");
  CHECK(by_id[4]["type"] == "error");
  CHECK(s.simulation().params().get("capture_radius") == 3);
  CHECK(s.simulation().params().get("step") == 0.25);
  s.receive(c, control(5, "setup").dump());
  s.pump();
  CHECK(s.simulation().params().get("capture_radius") == 5);
}

TEST_CASE("frames are throttled while running; metrics are not") {
  FakeClock fc;
  Session s(flocking_config(), {10, 0}, fc.clock());
  const auto c = s.connect();
  s.receive(c, control(1, "setup").dump());
  s.receive(c, control(2, "go").dump());
  s.pump();
  take(s, c);
  std::int64_t expect = s.simulation().world().tick() + 1;
  for (int i = 0; i < 200; ++i) {
    fc.now += 0.005;  // 200 ticks in one simulated second
    s.pump();
  }
  auto ms = take(s, c);
  const auto frames = count_type(ms, "frame");
  CHECK(frames <= 11);
  CHECK(frames >= 9);
  CHECK(count_type(ms, "metrics") == 200);
  for (const auto& m : ms) {
    if (m["type"] != "metrics") continue;
    CHECK(m["tick"] == expect++);
  }
  // frames are whole tick snapshots: the tick equals the metrics tick just before
  std::int64_t last_metrics = 0;
  for (const auto& m : ms) {
    if (m["type"] == "metrics") last_metrics = m["tick"];
    if (m["type"] == "frame") CHECK(m["tick"] == last_metrics);
  }
}

TEST_CASE("tick rate paces a running session") {
  FakeClock fc;
  Session s(flocking_config(), {0, 50}, fc.clock());
  const auto c = s.connect();
  s.receive(c, control(1, "setup").dump());
  s.receive(c, control(2, "go").dump());
  for (int i = 0; i < 1000; ++i) {
    fc.now += 0.001;
    s.pump();
  }
  CHECK(s.simulation().world().tick() >= 49);
  CHECK(s.simulation().world().tick() <= 51);
}

TEST_CASE("one controller at a time; viewers may subscribe; release hands over") {
  FakeClock fc;
  Session s(flocking_config(), {}, fc.clock());
  const auto a = s.connect();
  const auto b = s.connect();
  s.receive(a, control(1, "setup").dump());
  s.pump();
  s.receive(b, control(2, "step", 1).dump());
  s.receive(b, json({{"id", 3}, {"type", "subscribe"}, {"channels", {"metrics"}}}).dump());
  s.pump();
  auto ms = take(s, b);
  bool refused = false, subscribed = false;
  for (const auto& m : ms) {
    refused |= m["type"] == "error" && m["id"] == 2;
    subscribed |= m["type"] == "ack" && m["id"] == 3;
  }
  CHECK(refused);
  CHECK(subscribed);
  CHECK(s.controller() == a);

  s.receive(a, control(4, "release").dump());
  s.pump();
  s.receive(b, control(5, "step", 2).dump());
  s.pump();
  ms = take(s, b);
  CHECK(count_type(ms, "frame") == 0);  // metrics only
  CHECK(count_type(ms, "metrics") == 2);
  CHECK(s.controller() == b);
  s.disconnect(b);
  CHECK_FALSE(s.controller());
}

TEST_CASE("commands: results, positioned errors, queued while running") {
  FakeClock fc;
  Session s(flocking_config(), {0, 0}, fc.clock());
  const auto c = s.connect();
  s.receive(c, control(1, "setup").dump());
  s.receive(c, json({{"id", 2}, {"type", "command"}, {"text", "count nodes"}}).dump());
  s.receive(c, json({{"id", 3}, {"type", "command"}, {"text", "ask nodes [ fd"}}).dump());
  s.pump();
  auto ms = take(s, c);
  std::map<int, json> by_id;
  for (const auto& m : ms)
    if (m.contains("id") && m["id"].is_number()) by_id[m["id"]] = m;
  CHECK(by_id[2]["result"] == "40");
  CHECK(by_id[3]["type"] == "error");
  CHECK(by_id[3]["line"] == 1);
  CHECK(by_id[3]["column"] == 15);

  s.receive(c, control(4, "go").dump());
  s.pump();
  s.pump();
  const auto before = s.simulation().world().tick();
  s.receive(c, json({{"id", 5}, {"type", "command"}, {"text", "ask nodes [ set color red ]"}}).dump());
  CHECK(s.simulation().world().agent(5).color != 15);  // not applied mid-tick
  s.pump();
  CHECK(s.simulation().world().agent(5).color == 15);
  const auto& log = s.run_log();
  CHECK(log.back()["type"] == "command");
  CHECK(log.back()["tick"] == before);
}

TEST_CASE("encode_frame: empty world, id order, identical bytes, changed patches") {
  World empty;
  const auto f = json::parse(encode_frame(empty, 0));
  CHECK(f["type"] == "frame");
  CHECK(f["tick"] == 0);
  CHECK(f["agents"].empty());
  CHECK(f["links"].empty());
  CHECK(f["patches"].size() == empty.patches().size());

  World w;
  w.create_agents("node", 100);
  w.kill(3);
  w.create_link(1, 2);
  const auto line = encode_frame(w, std::nullopt);
  CHECK(line == encode_frame(w, std::nullopt));
  const auto g = json::parse(line);
  REQUIRE(g["agents"].size() == 99);
  for (std::size_t i = 1; i < g["agents"].size(); ++i) CHECK(g["agents"][i - 1]["id"] < g["agents"][i]["id"]);
  CHECK(g["patches"].size() == 1089);
  CHECK(g["links"] == json::parse("[[1,2]]"));
  const auto rev = w.patch_revision();
  w.set_pcolor(w.patch_at(2, 3), 15);
  const auto h = json::parse(encode_frame(w, rev));
  CHECK(h["patches"] == json::parse("[[2,3,15.0]]"));
}

TEST_CASE("websocket: accept key, framing, fragmentation") {
  CHECK(ws::accept_key("dGhlIHNhbXBsZSBub25jZQ==") == "s3pPLMBiTxaQ9kYGzzhZRbK+xOo=");
  CHECK(ws::upgrade_key("GET / HTTP/1.1\r\nUpgrade: websocket\r\nSec-WebSocket-Key: abc\r\n\r\n") == "abc");
  CHECK_FALSE(ws::upgrade_key("GET / HTTP/1.1\r\nHost: x\r\n\r\n"));
  CHECK_FALSE(ws::upgrade_key("{\"id\":1}\n"));

  for (std::size_t n : {0u, 5u, 125u, 126u, 300u, 70000u}) {
    const std::string payload(n, 'x');
    ws::Decoder d;
    const auto bytes = ws::encode_masked(ws::Opcode::text, payload, 0xdeadbeef);
    // byte at a time
    for (std::size_t i = 0; i + 1 < bytes.size(); ++i) {
      d.feed(bytes.substr(i, 1));
      REQUIRE_FALSE(d.next());
    }
    d.feed(bytes.substr(bytes.size() - 1));
    const auto f = d.next();
    REQUIRE(f);
    CHECK(f->payload == payload);
    ws::Decoder plain;
    plain.feed(ws::encode(ws::Opcode::text, payload));
    CHECK(plain.next()->payload == payload);
  }

  ws::Decoder d;
  std::string first = ws::encode_masked(ws::Opcode::text, "hel", 7);
  first[0] = static_cast<char>(first[0] & 0x7F);  // not final
  std::string rest = ws::encode_masked(ws::Opcode::continuation, "lo", 9);
  d.feed(first + ws::encode_masked(ws::Opcode::ping, "p", 1) + rest);
  CHECK(d.next()->opcode == ws::Opcode::ping);
  CHECK(d.next()->payload == "hello");
  ws::Decoder bad;
  bad.feed(std::string("\xF1\x00", 2));
  CHECK_THROWS(bad.next());
}

TEST_CASE("replay of a session log reproduces the live series") {
  FakeClock fc;
  Session s(flocking_config(), {0, 0}, fc.clock());
  const auto c = s.connect();
  s.receive(c, json({{"id", 0}, {"type", "set-param"}, {"name", "n_nodes"}, {"value", 60}}).dump());
  s.receive(c, control(1, "setup").dump());
  s.receive(c, control(2, "go").dump());
  for (int i = 0; i < 30; ++i) s.pump();
  s.receive(c, json({{"id", 3}, {"type", "command"}, {"text", "ask nodes with [ who < 20 ] [ setxy 0 0 rt random 360 ]"}}).dump());
  for (int i = 0; i < 17; ++i) s.pump();
  s.receive(c, json({{"id", 4}, {"type", "set-param"}, {"name", "step"}, {"value", 1.5}}).dump());
  for (int i = 0; i < 9; ++i) s.pump();
  s.receive(c, json({{"id", 5}, {"type", "command"}, {"text", "crt 5 [ setxy random-xcor random-ycor ]"}}).dump());
  for (int i = 0; i < 20; ++i) s.pump();
  s.receive(c, control(6, "stop").dump());
  s.pump();
  s.receive(c, control(7, "step", 4).dump());
  s.pump();
  s.close_log();

  std::string text;
  for (const auto& l : s.run_log()) text += l.dump() + "\n";
  const Series replayed = replay(parse_run_log(text));
  CHECK(to_csv(replayed) == to_csv(s.simulation().world().series()));
  CHECK(replayed.rows.size() == static_cast<std::size_t>(s.simulation().world().tick()));

  CHECK_THROWS(replay({}));
  CHECK_THROWS(parse_run_log("{\"tick\":0}\nnot json\n"));
}

TEST_CASE("live TCP and websocket clients") {
  const auto dir = std::filesystem::temp_directory_path() / "sosim_server_test";
  std::filesystem::create_directories(dir);
  ServerOptions opt;
  opt.session = {0, 200};
  opt.log_path = (dir / "run.log").string();
  opt.metrics_out = (dir / "metrics.csv").string();
  TcpServer server(flocking_config(), opt);
  std::thread owner([&] { server.run(); });
  {
    testnet::LineClient a(server.port());
    CHECK(a.expect("schema")["model"] == "flocking");
    a.send_raw("garbage\n");
    CHECK(a.expect("error")["id"].is_null());
    a.send(control(1, "setup"));
    CHECK(a.expect("ack", 1)["status"] == "ok");
    CHECK(a.expect("frame")["tick"] == 0);
    a.send(control(2, "step", 3));
    CHECK(a.expect("ack", 2)["status"] == "ok");

    testnet::WsClient b(server.port());
    CHECK(b.response.find("101 Switching Protocols") != std::string::npos);
    CHECK(b.response.find("s3pPLMBiTxaQ9kYGzzhZRbK+xOo=") != std::string::npos);
    auto schema = b.message();
    REQUIRE(schema);
    CHECK((*schema)["type"] == "schema");
    b.send({{"id", "x"}, {"type", "command"}, {"text", "count nodes"}});
    auto reply = b.message();
    REQUIRE(reply);
    CHECK((*reply)["type"] == "error");  // a controls the session
    a.send({{"id", 9}, {"type", "command"}, {"text", "count nodes"}});
    CHECK(a.expect("ack", 9)["result"] == "40");
  }
  server.stop();
  owner.join();
  const auto log = load_run_log(opt.log_path);
  REQUIRE(log.size() >= 3);
  CHECK(log.front()["type"] == "start");
  CHECK(log.back()["type"] == "end");
  CHECK(read_text_file(opt.metrics_out) == to_csv(replay(log)));
  std::filesystem::remove_all(dir);
}
