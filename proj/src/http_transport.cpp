#include <httplib.h>

#include "flowdial/llm.hpp"

namespace flowdial::llm {

HttpResponse HttpTransport::post(const std::string& url, const std::string& body,
                                 const std::map<std::string, std::string>& headers,
                                 std::chrono::milliseconds timeout) {
  HttpResponse out;
  const auto scheme_end = url.find("://");
  const auto path_start = url.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
  const std::string origin = path_start == std::string::npos ? url : url.substr(0, path_start);
  const std::string path = path_start == std::string::npos ? "/" : url.substr(path_start);

  httplib::Client client(origin);
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);
  httplib::Headers h;
  for (const auto& [k, v] : headers) {
    if (k != "Content-Type") h.emplace(k, v);
  }
  auto res = client.Post(path, h, body, "application/json");
  if (!res) {
    const auto err = res.error();
    out.failure = err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read
                      ? HttpResponse::Failure::Timeout
                      : HttpResponse::Failure::Network;
    out.body = httplib::to_string(err);
    return out;
  }
  out.status = res->status;
  out.body = res->body;
  return out;
}

}  // namespace flowdial::llm
