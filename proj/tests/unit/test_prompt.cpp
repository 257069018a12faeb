#include <gtest/gtest.h>

#include <charconv>
#include <cmath>

#include "cournot/errors.hpp"
#include "cournot/prompt.hpp"
#include "oracles.hpp"

using namespace cournot;

namespace {
MarketModel model_of(std::vector<double> q) {
  MarketSpec s;
  s.baseline_quantities = std::move(q);
  return derive_model(s);
}

std::string block(const std::string& prompt, const std::string& name) {
  const std::string head = "Filename: " + name + "\n++++++++++++++++++\n";
  const auto start = prompt.find(head);
  if (start == std::string::npos) return "<missing>";
  const auto body = start + head.size();
  const auto end = prompt.find("++++++++++++++++++", body);
  return prompt.substr(body, end - body);
}

std::string reply(const std::string& q, const std::string& pct) {
  return "My observations and thoughts:\nfine\n\nNew content for PLANS.txt:\nhold\n\n"
         "New content for INSIGHTS.txt:\nnone\n\nMy chosen production quantity:\n" +
         q + "\n\nMy chosen investment (in percent):\n" + pct + "\n";
}
}  // namespace

TEST(RenderPrompt, TwoFirmFirstPeriod) {
  const MarketModel m = model_of({150, 150});
  const std::string p = render_prompt(initial_prompt_context(m, 0));
  EXPECT_NE(p.find("this 2-firm market"), std::string::npos);
  EXPECT_NE(p.find("you can invest AT MOST 20 percent into capital"), std::string::npos);
  EXPECT_NE(p.find("Your fixed initial surplus is 75,"), std::string::npos);
  EXPECT_NE(p.find("your average cost of production was 0.5."), std::string::npos);
  EXPECT_NE(p.find("you produced about 150 units, at price = 1."), std::string::npos);
  EXPECT_NE(p.find("don’t repeat yourself"), std::string::npos);
  EXPECT_EQ(block(p, "PLANS.txt"), "\n");
  EXPECT_EQ(block(p, "INSIGHTS.txt"), "\n");
  EXPECT_EQ(block(p, "MARKET_DATA (read-only)"), "\n");
  EXPECT_EQ(p.find('{'), std::string::npos);
  EXPECT_EQ(p.find('}'), std::string::npos);
}

TEST(RenderPrompt, FiveFirmSurplus) {
  const MarketModel m = model_of({350, 250, 200, 150, 50});
  const std::string p = render_prompt(initial_prompt_context(m, 0));
  EXPECT_NE(p.find("Your fixed initial surplus is 122.5,"), std::string::npos);
  EXPECT_NE(p.find("this 5-firm market"), std::string::npos);
  EXPECT_NE(p.find("average cost of production was 0.65."), std::string::npos);
}

TEST(RenderPrompt, HistoryRowsAreListed) {
  const MarketModel m = model_of({150, 150});
  PromptContext ctx = initial_prompt_context(m, 0);
  std::vector<Observation> h{{0, 150, 20, 0.5, 300, 1, 60}, {1, 140, 20, 0.5, 290, 1.0345, 59.8},
                             {2, 130, 10, 0.6, 280, 1.0714, 60.1}};
  ctx.market_history_text = render_market_history(h);
  const std::string data = block(render_prompt(ctx), "MARKET_DATA (read-only)");
  std::size_t rows = 0;
  for (std::size_t pos = 0; (pos = data.find("Period ", pos)) != std::string::npos; ++pos) ++rows;
  EXPECT_EQ(rows, 3u);
  EXPECT_NE(data.find("Period 1: production 150.00 units, investment 20.00 percent, production cost 0.5000, "
                      "total market production 300.00 units, price 1.000, profit 60.00"),
            std::string::npos);
}

TEST(RenderPrompt, RejectsIncompleteContext) {
  PromptContext ctx;
  EXPECT_THROW(render_prompt(ctx), std::invalid_argument);
  const MarketModel m = model_of({150, 150});
  ctx = initial_prompt_context(m, 0);
  ctx.baseline_cost = NAN;
  EXPECT_THROW(render_prompt(ctx), std::invalid_argument);
}

TEST(ParseResponse, WellFormed) {
  const MarketModel m = model_of({150, 150});
  const ParsedReply r = parse_response(reply("150", "20"), m, 0);
  EXPECT_EQ(r.decision.quantity, 150);
  EXPECT_EQ(r.decision.invest_percent, 20);
  EXPECT_FALSE(r.clamped);
  EXPECT_EQ(r.plans.value(), "hold");
  EXPECT_EQ(r.insights.value(), "none");
}

TEST(ParseResponse, ClampsInvestment) {
  const MarketModel m = model_of({150, 150});
  const ParsedReply r = parse_response(reply("150", "25"), m, 0);
  EXPECT_EQ(r.decision.invest_percent, 20);
  EXPECT_TRUE(r.clamped);
  EXPECT_EQ(r.requested_percent, 25);
  const ParsedReply neg = parse_response(reply("150", "-3"), m, 0);
  EXPECT_EQ(neg.decision.invest_percent, 0);
  EXPECT_TRUE(neg.clamped);
}

TEST(ParseResponse, ToleratesFormattingDrift) {
  const MarketModel m = model_of({150, 150});
  EXPECT_EQ(parse_response(reply("**1,234.5** units", "about 12.5%"), m, 0).decision.quantity, 1234.5);
  EXPECT_EQ(parse_response(reply("  \n\n  140", "20"), m, 0).decision.quantity, 140);
  const std::string inline_answer =
      "My chosen production quantity: 133\nMy chosen investment (in percent): 17.5\n";
  const ParsedReply r = parse_response(inline_answer, m, 0);
  EXPECT_EQ(r.decision.quantity, 133);
  EXPECT_EQ(r.decision.invest_percent, 17.5);
  EXPECT_FALSE(r.plans.has_value());
}

TEST(ParseResponse, Failures) {
  const MarketModel m = model_of({150, 150});
  EXPECT_THROW(parse_response("My chosen production quantity:\n150\n", m, 0), ParseFailure);
  EXPECT_THROW(parse_response(reply("lots", "20"), m, 0), ParseFailure);
  EXPECT_THROW(parse_response(reply("-5", "20"), m, 0), ParseFailure);
  EXPECT_THROW(parse_response(reply("", ""), m, 0), ParseFailure);
  try {
    parse_response(reply("several hundred", "20"), m, 0);
    FAIL();
  } catch (const ParseFailure& e) {
    EXPECT_NE(e.excerpt().find("several hundred"), std::string::npos);
  }
}

TEST(ParseResponse, RoundTripIsLossless) {
  const MarketModel m = model_of({350, 250, 200, 150, 50});
  oracle::Rng rng(17);
  for (int k = 0; k < 1000; ++k) {
    const std::size_t i = rng.index(5);
    const double q = rng.uniform(0, 1000) * (rng.index(10) == 0 ? 1e-4 : 1.0);
    const double pct = rng.index(8) == 0 ? 20.0 : rng.uniform(0, 20);
    const Decision d = Decision::make(m, i, q, pct);
    const ParsedReply r = parse_response(format_reply(d, "p", "i"), m, i);
    EXPECT_EQ(r.decision, d);
    EXPECT_FALSE(r.clamped);
  }
}
