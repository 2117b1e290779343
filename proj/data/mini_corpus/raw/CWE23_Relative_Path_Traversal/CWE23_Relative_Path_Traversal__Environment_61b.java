package testcases.CWE23_Relative_Path_Traversal;

import testcasesupport.*;

public class CWE23_Relative_Path_Traversal__Environment_61b
{
    public String badSource() throws Throwable
    {
        return System.getenv("ADD");
    }

    public String goodG2BSource() throws Throwable
    {
        return "foo";
    }
}
