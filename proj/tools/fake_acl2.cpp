// Runs the in-process fake ACL2 over stdin/stdout so the process transport
// can be exercised without a real ACL2.
#include <unistd.h>

#include <cerrno>
#include <string_view>

#include "proofpad/fake_acl2.hpp"

namespace {

void write_all(std::string_view bytes) {
  while (!bytes.empty()) {
    ssize_t n = ::write(1, bytes.data(), bytes.size());
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) return;
    bytes.remove_prefix(static_cast<std::size_t>(n));
  }
}

}  // namespace

int main() {
  proofpad::FakeAcl2 fake;
  write_all(fake.banner());
  char buf[4096];
  while (true) {
    ssize_t n = ::read(0, buf, sizeof buf);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) return 0;
    write_all(fake.feed(std::string_view(buf, static_cast<std::size_t>(n))));
    if (fake.crashed()) return 3;
  }
}
