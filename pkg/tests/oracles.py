"""Independent reference implementations used as second routes in tests.

scan_events derives the expected alert-event sequence for a scripted
(timestamp, value) stream by scanning classification runs and anchor
times, instead of stepping the production state machine.  Keep it free
of imports from verdancy.alerts.
"""

SEV_RANK = {"WARNING": 0, "CRITICAL": 1}


def classify_ref(value, bands):
    if bands.critical_low is not None and value < bands.critical_low:
        return ("LOW", "CRITICAL")
    if bands.low is not None and value < bands.low:
        return ("LOW", "WARNING")
    if bands.critical_high is not None and value > bands.critical_high:
        return ("HIGH", "CRITICAL")
    if bands.high is not None and value > bands.high:
        return ("HIGH", "WARNING")
    return None


def bound_ref(bands, direction, severity):
    return {
        ("LOW", "WARNING"): bands.low,
        ("LOW", "CRITICAL"): bands.critical_low,
        ("HIGH", "WARNING"): bands.high,
        ("HIGH", "CRITICAL"): bands.critical_high,
    }[(direction, severity)]


def scan_events(samples, bands, breach_s=1800, recover_s=900, gap_s=600, renotify_s=None):
    """Expected events as (kind, severity, direction, at_ms, value, bound)."""
    breach_ms = breach_s * 1000
    recover_ms = recover_s * 1000
    gap_ms = gap_s * 1000
    renotify_ms = None if renotify_s is None else renotify_s * 1000

    events = []
    alerting = False
    pending_anchor = None
    recovering_anchor = None
    ep_sev = ep_dir = None
    last_notified = None
    prev_t = None
    prev_breaching = False

    for t, v in samples:
        c = classify_ref(v, bands)
        gap = prev_t is not None and (t - prev_t) > gap_ms
        if not alerting:
            if c is None:
                pending_anchor = None
            else:
                if pending_anchor is None or not prev_breaching or gap:
                    pending_anchor = t
                if t - pending_anchor >= breach_ms:
                    ep_dir, ep_sev = c
                    events.append(
                        ("RAISED", ep_sev, ep_dir, t, v, bound_ref(bands, ep_dir, ep_sev))
                    )
                    alerting = True
                    last_notified = t
                    pending_anchor = None
                    recovering_anchor = None
        else:
            if c is None:
                if recovering_anchor is None or gap:
                    recovering_anchor = t
                if t - recovering_anchor >= recover_ms:
                    events.append(
                        ("RECOVERED", ep_sev, ep_dir, t, v, bound_ref(bands, ep_dir, ep_sev))
                    )
                    alerting = False
                    ep_sev = ep_dir = None
                    last_notified = None
                    recovering_anchor = None
            else:
                was_recovering = recovering_anchor is not None
                recovering_anchor = None
                if SEV_RANK[c[1]] > SEV_RANK[ep_sev]:
                    ep_dir, ep_sev = c
                    events.append(
                        ("ESCALATED", ep_sev, ep_dir, t, v, bound_ref(bands, ep_dir, ep_sev))
                    )
                    last_notified = t
                elif (
                    not was_recovering
                    and renotify_ms is not None
                    and t - last_notified >= renotify_ms
                ):
                    events.append(
                        ("REPEATED", ep_sev, ep_dir, t, v, bound_ref(bands, ep_dir, ep_sev))
                    )
                    last_notified = t
        prev_breaching = c is not None
        prev_t = t
    return events


def brute_stats(values):
    """Single-pass mean/min/max oracle for analytics comparisons."""
    if not values:
        return (0, None, None, None)
    return (len(values), sum(values) / len(values), min(values), max(values))
