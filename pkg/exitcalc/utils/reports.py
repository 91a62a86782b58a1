import pandas as pd

from exitcalc.core.exit import (
    env_homology, fiber, is_finite_presentation,
)
from exitcalc.core.hocat import check_conservative_over_P, localize_hocat

COUNT_COLUMNS = ['dims', 'q', 'functors', 'classes', 'cardinality']
HOMOLOGY_COLUMNS = ['scope', 'degree', 'rank', 'torsion']


class ReportEngine:
    """Invariant summaries and the tables behind them"""

    @staticmethod
    def homology_rows(scope, result):
        return [
            {
                'scope': scope,
                'degree': n,
                'rank': rank,
                'torsion': ' '.join(f'Z/{t}' for t in torsion),
            }
            for n, (rank, torsion) in enumerate(zip(result.betti, result.torsion))
        ]

    @staticmethod
    def invariants_report(pres, depth=None):
        """Env homology, fiber homology, conservativity and finiteness counts"""
        env = env_homology(pres)
        fibers = {p: env_homology(fiber(pres, p)) for p in pres.target.elements}
        localization = localize_hocat(pres, depth)
        if localization.certified:
            conservative = 'yes' if check_conservative_over_P(localization, pres) else 'no'
        elif not localization.closed:
            conservative = 'budget'
        else:
            conservative = 'uncertified'
        finiteness = is_finite_presentation(pres)
        return {
            'env_homology': env,
            'fiber_homology': fibers,
            'contractible_fibers': sorted(
                p for p, h in fibers.items() if h.betti == (1,) and h.torsion == ((),)
            ),
            'conservative': conservative,
            'finite': finiteness.finite,
            'counts': finiteness.counts,
        }

    @staticmethod
    def invariants_table(report):
        rows = ReportEngine.homology_rows('env', report['env_homology'])
        for p, result in sorted(report['fiber_homology'].items()):
            rows.extend(ReportEngine.homology_rows(f'fiber:{p}', result))
        return pd.DataFrame(rows, columns=HOMOLOGY_COLUMNS)

    @staticmethod
    def invariants_document(report):
        elements, hasse, marks = report['counts']
        return {
            'env_homology': str(report['env_homology']),
            'fiber_homology': {p: str(h) for p, h in sorted(report['fiber_homology'].items())},
            'conservative': report['conservative'],
            'finite': report['finite'],
            'counts': {'elements': elements, 'hasse': hasse, 'marks': marks},
        }

    @staticmethod
    def count_table(rows):
        """One row per dimension vector, as produced by CountResult.to_row"""
        return pd.DataFrame(list(rows), columns=COUNT_COLUMNS)

    @staticmethod
    def render(df, fmt):
        """CSV or JSON records for a report table"""
        if fmt == 'json':
            return df.to_json(orient='records', indent=2) + '\n'
        return df.to_csv(index=False)
