#pragma once

#include "arena_rank/core.hpp"
#include "arena_rank/random.hpp"
#include "arena_rank/match.hpp"
#include "arena_rank/judge.hpp"
#include "arena_rank/tournaments.hpp"
#include "arena_rank/advantage.hpp"
#include "arena_rank/lab.hpp"
#include "arena_rank/serialization.hpp"
#include "arena_rank/remote_judge.hpp"
#include "arena_rank/config.hpp"
#include "arena_rank/service.hpp"
