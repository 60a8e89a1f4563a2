#pragma once

#include "skb/bounds/accessible.hpp"
#include "skb/bounds/entanglement.hpp"
#include "skb/bounds/estimate.hpp"
#include "skb/bounds/intrinsic.hpp"
#include "skb/bounds/monotone.hpp"
