#include "phishtriage/maildir.hpp"

#include <algorithm>
#include <fstream>
#include <system_error>

#include "phishtriage/error.hpp"
#include "phishtriage/fs_util.hpp"

namespace phishtriage {
namespace fs = std::filesystem;

MaildirAdapter::MaildirAdapter(fs::path root) : root_(std::move(root)) {
  std::error_code ec;
  for (const auto& dir : {inbox(), spam(), reports()}) {
    fs::create_directories(dir, ec);
    if (ec) throw Error(ErrorCode::Io, "cannot create " + dir.string() + ": " + ec.message());
  }
  std::ifstream in(ledger());
  std::string line;
  while (std::getline(in, line)) {
    const auto id = line.substr(0, line.find('\t'));
    if (!id.empty()) processed_.insert(id);
  }
}

bool MaildirAdapter::is_processed(const std::string& id) const {
  std::lock_guard lock(mutex_);
  return processed_.contains(id);
}

std::vector<IncomingMessage> MaildirAdapter::poll_new(std::size_t max_messages) {
  std::vector<fs::path> candidates;
  std::error_code ec;
  for (fs::directory_iterator it(inbox(), ec), end; !ec && it != end; it.increment(ec)) {
    if (it->is_regular_file() && it->path().extension() == ".eml") candidates.push_back(it->path());
  }
  if (ec) throw Error(ErrorCode::Io, "cannot list " + inbox().string() + ": " + ec.message());
  std::sort(candidates.begin(), candidates.end());

  std::vector<IncomingMessage> out;
  for (const auto& path : candidates) {
    if (out.size() >= max_messages) break;
    std::string id = path.stem().string();
    if (is_processed(id)) continue;
    try {
      out.push_back({std::move(id), read_file(path)});
    } catch (const Error&) {
      // Vanished or still being written; pick it up next time.
    }
  }
  return out;
}

void MaildirAdapter::move_to_spam(const std::string& id) {
  const fs::path from = inbox() / (id + ".eml");
  const fs::path to = spam() / (id + ".eml");
  std::error_code ec;
  fs::rename(from, to, ec);
  if (ec) {
    if (!fs::exists(from) && fs::exists(to)) return;
    throw Error(ErrorCode::Io, "cannot move " + from.string() + " to spam: " + ec.message());
  }
}

void MaildirAdapter::deliver_report(const std::string& id, const std::string& text) {
  try {
    write_file_atomic(reports() / (id + ".txt"), text);
  } catch (const Error& e) {
    throw Error(ErrorCode::Io, e.what());
  }
}

void MaildirAdapter::mark_processed(const std::string& id, std::string_view tag) {
  std::lock_guard lock(mutex_);
  if (processed_.contains(id)) return;
  std::ofstream out(ledger(), std::ios::app | std::ios::binary);
  out << id << '\t' << tag << '\n';
  out.flush();
  if (!out) throw Error(ErrorCode::Io, "cannot append to " + ledger().string());
  processed_.insert(id);
}

}  // namespace phishtriage
