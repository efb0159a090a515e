#pragma once

#include <filesystem>
#include <mutex>
#include <set>
#include <string>

#include "phishtriage/gateway.hpp"

namespace phishtriage {

/// Filesystem mailbox: inbox/*.eml is consumed, spam/<id>.eml receives moved
/// messages, reports/<id>.txt the user reports, and ".processed" is an
/// append-only ledger of "<id>\t<tag>" lines. The message id is the file stem.
class MaildirAdapter final : public MailboxAdapter {
 public:
  /// Creates the subdirectories when missing. Throws Error{Io}.
  explicit MaildirAdapter(std::filesystem::path root);

  std::vector<IncomingMessage> poll_new(std::size_t max_messages) override;
  void move_to_spam(const std::string& id) override;
  void deliver_report(const std::string& id, const std::string& text) override;
  void mark_processed(const std::string& id, std::string_view tag) override;

  bool is_processed(const std::string& id) const;

  std::filesystem::path inbox() const { return root_ / "inbox"; }
  std::filesystem::path spam() const { return root_ / "spam"; }
  std::filesystem::path reports() const { return root_ / "reports"; }
  std::filesystem::path ledger() const { return root_ / ".processed"; }

 private:
  std::filesystem::path root_;
  mutable std::mutex mutex_;
  std::set<std::string, std::less<>> processed_;
};

}  // namespace phishtriage
