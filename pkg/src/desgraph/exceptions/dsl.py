from typing import Optional


class SpecError(Exception):
    line: Optional[int] = None
    column: Optional[int] = None
    token: Optional[str] = None

    def __init__(self, message, line=None, column=None, token=None):
        super().__init__(message)
        self.message = message
        self.line = line
        self.column = column
        self.token = token

    def __str__(self):
        if self.line is None:
            return self.message
        if self.column is None:
            return f"line {self.line}: {self.message}"
        return f"line {self.line}, column {self.column}: {self.message}"


class SpecSyntaxError(SpecError):
    """
    The spec text does not follow the grammar
    """

    pass


class SpecSemanticError(SpecError):
    """
    The spec parses but refers to unknown names, redefines a name or misuses a role
    """

    pass
