#include <csignal>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "tops/mock_server.hpp"

// Standalone mock chat-completion endpoint for local pipeline runs:
//   tops-mock-server --script replies.json [--delay-ms 20]
// Prints the bound port on stdout, then serves until interrupted.
int main(int argc, char** argv) {
  CLI::App app{"Mock chat-completion server"};
  std::string script;
  int delay_ms = 0;
  app.add_option("--script", script, "canned replies JSON")->required();
  app.add_option("--delay-ms", delay_ms, "artificial per-request latency");
  CLI11_PARSE(app, argc, argv);

  try {
    tops::MockChatServer server(script, delay_ms);
    server.start();
    std::cout << server.port() << std::endl;
    // serve until killed
    for (;;) pause();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
