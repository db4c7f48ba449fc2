#pragma once

#include "motifrules/csv.hpp"
#include "motifrules/error.hpp"
#include "motifrules/evaluation.hpp"
#include "motifrules/matching.hpp"
#include "motifrules/mdl.hpp"
#include "motifrules/miner.hpp"
#include "motifrules/motif.hpp"
#include "motifrules/scan.hpp"
#include "motifrules/series.hpp"
#include "motifrules/synthetic.hpp"
