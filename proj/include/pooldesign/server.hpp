#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

namespace pooldesign {

/// Flag value, else POOLDESIGN_PORT, else 8090.
int resolve_port(std::optional<int> flag);

/// True for http(s)://localhost and http(s)://127.0.0.1 origins, any port.
bool is_local_origin(const std::string& origin);

struct ServerOptions {
  std::string host = "127.0.0.1";
  int port = 8090;  // 0 binds an ephemeral port
  std::filesystem::path session_dir = "sessions";
  std::filesystem::path sweep_root = "sweep";
  std::filesystem::path static_dir;  // optional UI bundle served at /
};

class Server {
 public:
  explicit Server(ServerOptions options);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  /// Binds the socket; returns the bound port.
  int bind();
  /// Blocks serving requests until stop().
  void listen();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace pooldesign
