"""Fixed English stopword list used for keyword ranking and answer overlap."""

STOPWORDS = frozenset(
    """
    a about above after again against all also always am among an and any are
    around as at be because been before behind being below beside between
    beyond both but by came can cannot come comes could did do does doing down
    during each either every few for from further get gets getting go goes
    going got had has have having he her here hers herself him himself his how
    however i if in inside into is it its itself just like made make makes
    many may me might more most much must my myself near neither never next no
    nor not now of off on once only onto or other our ours ourselves out over
    own per put rather same see seen shall she should since so some still such
    take taken takes than that the their theirs them themselves then there
    these they this those though through thus to too toward under until unto
    up upon using very via want wants was we well went were what when where
    which while who whom why will with within without would yet you your yours
    yourself yourselves
    """.split()
)
