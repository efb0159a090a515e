#include <benchmark/benchmark.h>

#include <string>

#include "phishtriage/html_reducer.hpp"
#include "phishtriage/metrics.hpp"
#include "phishtriage/mime.hpp"
#include "phishtriage/public_suffix.hpp"
#include "phishtriage/text_cleaner.hpp"

namespace {

using namespace phishtriage;

std::string sample_html(int blocks) {
  std::string html = "<html><head><style>p{color:red}</style></head><body>";
  for (int i = 0; i < blocks; ++i) {
    html += "<div><p>Dear customer, your account <b>requires</b> verification &amp; review.</p>"
            "<a href=\"https://login.example.com/a/b/c/d/e/f/g/h/i/j/k?session=" +
            std::to_string(i) + "#top\">Confirm</a><span style=\"font-size:0px\">hidden</span>"
            "<img src=\"http://track.example/o" + std::to_string(i) + "\"></div>";
  }
  return html + "</body></html>";
}

void BM_ReduceHtml(benchmark::State& state) {
  const std::string html = sample_html(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(reduce_html(html));
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * html.size()));
}
BENCHMARK(BM_ReduceHtml)->Arg(10)->Arg(200);

void BM_CleanText(benchmark::State& state) {
  std::string text;
  for (int i = 0; i < 200; ++i) text += "Hello \xF0\x9F\x98\x80  world\t\r\n\xC2\xA0 caf\xC3\xA9 ";
  for (auto _ : state) benchmark::DoNotOptimize(clean_text(text));
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * text.size()));
}
BENCHMARK(BM_CleanText);

void BM_TruncateUrl(benchmark::State& state) {
  const std::string url = "https://user@login.example.com:8443/a/b/c/d/e/f/g/h/i/j/k/l/m?x=1&y=2#frag";
  for (auto _ : state) benchmark::DoNotOptimize(truncate_url(url));
}
BENCHMARK(BM_TruncateUrl);

void BM_ParseEml(benchmark::State& state) {
  const std::string raw =
      "From: Sender <a@b.example>\r\nSubject: =?UTF-8?B?SGVsbG8gd29ybGQ=?=\r\nMIME-Version: 1.0\r\n"
      "Content-Type: multipart/alternative; boundary=\"xx\"\r\n\r\n--xx\r\nContent-Type: text/plain\r\n\r\nplain\r\n"
      "--xx\r\nContent-Type: text/html; charset=utf-8\r\nContent-Transfer-Encoding: quoted-printable\r\n\r\n" +
      sample_html(20) + "\r\n--xx--\r\n";
  for (auto _ : state) benchmark::DoNotOptimize(parse_eml(raw));
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * raw.size()));
}
BENCHMARK(BM_ParseEml);

void BM_ComputeMetrics(benchmark::State& state) {
  const ConfusionCounts counts{4806, 93, 1869, 98};
  for (auto _ : state) benchmark::DoNotOptimize(compute_metrics(counts));
}
BENCHMARK(BM_ComputeMetrics);

void BM_RegistrableDomain(benchmark::State& state) {
  const auto& psl = PublicSuffixList::builtin();
  const std::string hosts[] = {"www.facebook.com", "a.b.c.example.co.uk", "foo.s3.amazonaws.com", "bit.ly"};
  std::size_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(psl.registrable_domain(hosts[i++ % 4]));
}
BENCHMARK(BM_RegistrableDomain);

}  // namespace

BENCHMARK_MAIN();
